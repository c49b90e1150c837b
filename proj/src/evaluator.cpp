#include "ldapot/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <thread>
#include <variant>

#include "ldapot/ber.hpp"
#include "ldapot/csv.hpp"
#include "ldapot/message.hpp"

namespace ldapot::eval {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool whitespace_only(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

// What the scorer needs to know about the request being answered.
struct RequestInfo {
    bool ok = false;
    std::string op;
    std::int32_t message_id = 0;
    std::int32_t size_limit = 0;   // searchRequest only
    bool expects_empty = false;    // abandon/unbind
    bool is_search = false;
};

RequestInfo parse_request_info(const std::string& input) {
    RequestInfo info;
    try {
        const LdapMessage m = jsonio::parse_document(input);
        const std::string op(op_name(m.op));
        if (!is_request_op(op)) return info;
        info.ok = true;
        info.op = op;
        info.message_id = m.message_id;
        info.expects_empty = op == "unbindRequest" || op == "abandonRequest";
        info.is_search = op == "searchRequest";
        if (const auto* search = std::get_if<SearchRequest>(&m.op))
            info.size_limit = search->size_limit;
    } catch (const std::exception&) {
        info.ok = false;
    }
    return info;
}

// One carved block of a response column, pre-digested for the metrics.
struct ParsedDoc {
    Json value;                           // object when json_ok
    bool json_ok = false;
    std::optional<std::int64_t> message_id;
    std::optional<std::string> op;        // protocolOp key when shaped right
};

struct DocStream {
    std::vector<ParsedDoc> docs;
    int unparseable = 0;   // garbage runs plus a truncated trailing fragment
    bool clean() const { return unparseable == 0; }
};

DocStream parse_stream(const std::string& text) {
    DocStream out;
    jsonio::SplitResult split = jsonio::split_json_stream(text);
    out.unparseable = split.garbage_chunks + (whitespace_only(split.remainder) ? 0 : 1);
    for (const std::string& block : split.documents) {
        ParsedDoc doc;
        Json value = Json::parse(block, nullptr, false);
        if (!value.is_discarded() && value.is_object()) {
            doc.json_ok = true;
            if (const auto id = value.find("messageID");
                id != value.end() && id->is_number_integer())
                doc.message_id = id->get<std::int64_t>();
            if (const auto op = value.find("protocolOp");
                op != value.end() && op->is_object() && op->size() == 1)
                doc.op = op->begin().key();
            doc.value = std::move(value);
        }
        out.docs.push_back(std::move(doc));
    }
    return out;
}

std::set<std::string> op_name_set(const DocStream& stream) {
    std::set<std::string> names;
    for (const ParsedDoc& doc : stream.docs)
        if (doc.op) names.insert(*doc.op);
    return names;
}

int count_op(const DocStream& stream, std::string_view name) {
    int n = 0;
    for (const ParsedDoc& doc : stream.docs)
        if (doc.op && *doc.op == name) ++n;
    return n;
}

bool ends_with_op(const DocStream& stream, std::string_view name) {
    return !stream.docs.empty() && stream.docs.back().op &&
           *stream.docs.back().op == name;
}

double mean_or_nan(double sum, int count) { return count == 0 ? kNaN : sum / count; }

}  // namespace

void WeightConfig::validate() const {
    const double all[] = {search_syntax,   search_structure, search_key_fields,
                          search_completeness, other_syntax, other_structure,
                          other_key_fields};
    for (double w : all)
        if (w < 0) throw std::invalid_argument("metric weights must be non-negative");
    const double search_sum =
        search_syntax + search_structure + search_key_fields + search_completeness;
    if (std::abs(search_sum - 1.0) > 1e-9)
        throw std::invalid_argument("search weights must sum to 1.0, got " +
                                    std::to_string(search_sum));
}

// ------------------------------------------------------------------ metrics

int syntax_pass(const std::string& input, const std::string& prediction) {
    const RequestInfo request = parse_request_info(input);
    const jsonio::SplitResult split = jsonio::split_json_stream(prediction);
    const bool clean = split.garbage_chunks == 0 && whitespace_only(split.remainder);
    if (split.documents.empty()) return clean && request.ok && request.expects_empty ? 1 : 0;
    if (!clean) return 0;
    for (const std::string& block : split.documents) {
        try {
            ber::encode_message(jsonio::parse_document(block));
        } catch (const std::exception&) {
            return 0;
        }
    }
    return 1;
}

int structure_pass(const std::string& input, const std::string& prediction,
                   bool require_search_entries) {
    const RequestInfo request = parse_request_info(input);
    if (!request.ok) return 0;
    const DocStream stream = parse_stream(prediction);
    if (!stream.clean()) return 0;  // junk counts as an unintended element
    std::vector<std::string> ops;
    for (const ParsedDoc& doc : stream.docs) {
        if (!doc.op) return 0;
        ops.push_back(*doc.op);
    }

    if (request.expects_empty) return ops.empty() ? 1 : 0;
    if (request.is_search) {
        if (ops.empty()) return 0;
        if (ops.back() != "searchResDone") return 0;
        for (std::size_t i = 0; i + 1 < ops.size(); ++i)
            if (ops[i] != "searchResEntry") return 0;
        if (require_search_entries && ops.size() < 2) return 0;
        return 1;
    }
    const std::optional<std::string_view> expected = response_op_for(request.op);
    return expected && ops.size() == 1 && ops[0] == *expected ? 1 : 0;
}

double key_field_accuracy(const std::string& input, const std::string& output,
                          const std::string& prediction) {
    const RequestInfo request = parse_request_info(input);
    const DocStream predicted = parse_stream(prediction);
    const DocStream reference = parse_stream(output);

    // Component 1: share of predicted documents carrying the request id.
    const int total = static_cast<int>(predicted.docs.size()) + predicted.unparseable;
    double id_fraction = 0.0;
    if (total == 0) {
        id_fraction = request.ok && request.expects_empty ? 1.0 : 0.0;
    } else {
        int matching = 0;
        for (const ParsedDoc& doc : predicted.docs)
            if (doc.message_id && *doc.message_id == request.message_id) ++matching;
        id_fraction = static_cast<double>(matching) / total;
    }

    // Component 2: Jaccard similarity of the operation-name sets.
    const std::set<std::string> a = op_name_set(reference);
    const std::set<std::string> b = op_name_set(predicted);
    double jaccard = 1.0;  // both empty: nothing expected, nothing produced
    if (!a.empty() || !b.empty()) {
        std::vector<std::string> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::back_inserter(common));
        std::vector<std::string> either;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(either));
        jaccard = static_cast<double>(common.size()) / static_cast<double>(either.size());
    }

    return (id_fraction + jaccard) / 2.0;
}

double completeness_score(const std::string& input, const std::string& output,
                          const std::string& prediction, double coverage_weight) {
    const RequestInfo request = parse_request_info(input);
    if (!request.ok || !request.is_search) return kNaN;
    coverage_weight = std::clamp(coverage_weight, 0.0, 1.0);

    const DocStream reference = parse_stream(output);
    int expected = 0;
    if (reference.docs.empty()) {
        // No reference to count against: expect what the request asked for.
        expected = request.size_limit > 0 ? request.size_limit : 1;
    } else {
        expected = count_op(reference, "searchResEntry");
    }

    const DocStream predicted = parse_stream(prediction);
    const int produced = count_op(predicted, "searchResEntry");
    const double coverage =
        expected == 0 ? 1.0 : std::min(1.0, static_cast<double>(produced) / expected);
    const double closed = ends_with_op(predicted, "searchResDone") ? 1.0 : 0.0;
    return coverage_weight * coverage + (1.0 - coverage_weight) * closed;
}

double weighted_validity(int syntax, int structure, double key_fields, double completeness,
                         bool is_search, const WeightConfig& weights) {
    weights.validate();
    if (is_search) {
        const double complete = std::isnan(completeness) ? 0.0 : completeness;
        return weights.search_syntax * syntax + weights.search_structure * structure +
               weights.search_key_fields * key_fields +
               weights.search_completeness * complete;
    }
    const double raw = weights.other_syntax * syntax + weights.other_structure * structure +
                       weights.other_key_fields * key_fields;
    const double sum = weights.other_syntax + weights.other_structure + weights.other_key_fields;
    if (weights.normalize_by_weight_sum && sum > 0) return raw / sum;
    return raw;
}

// ---------------------------------------------------------------- per row

RowReport evaluate_row(const EvalRow& row, const EvalOptions& options) {
    options.weights.validate();
    const RequestInfo request = parse_request_info(row.input);
    if (!request.ok)
        throw std::invalid_argument("input column is not a single request document");

    RowReport report;
    report.operation = request.op;
    report.syntax = syntax_pass(row.input, row.prediction);
    report.structure =
        structure_pass(row.input, row.prediction, options.require_search_entries);
    report.key_fields = key_field_accuracy(row.input, row.output, row.prediction);
    report.completeness = completeness_score(row.input, row.output, row.prediction,
                                             options.completeness_coverage_weight);
    report.weighted = weighted_validity(report.syntax, report.structure, report.key_fields,
                                        report.completeness, request.is_search,
                                        options.weights);

    if (report.syntax == 0) {
        const jsonio::SplitResult split = jsonio::split_json_stream(row.prediction);
        if (split.documents.empty() && split.garbage_chunks == 0 &&
            whitespace_only(split.remainder))
            report.notes.push_back("prediction is empty but " + request.op +
                                   " expects a response");
        else if (!whitespace_only(split.remainder))
            report.notes.push_back("prediction ends with a truncated document");
        else if (split.garbage_chunks > 0)
            report.notes.push_back("prediction contains text that is not a JSON document");
        else
            report.notes.push_back("a prediction document fails message validation");
    }
    if (report.structure == 0)
        report.notes.push_back("response sequence does not match the " + request.op +
                               " pairing rule");
    if (report.key_fields < 1.0)
        report.notes.push_back("messageID or operation-set mismatch against the reference");
    if (!std::isnan(report.completeness) && report.completeness < 1.0)
        report.notes.push_back("missing entries or closing searchResDone");
    return report;
}

EvalReport evaluate_dataset(const std::vector<EvalRow>& rows, const EvalOptions& options) {
    options.weights.validate();
    EvalReport report;
    report.rows.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            report.rows.push_back(evaluate_row(rows[i], options));
        } catch (const std::invalid_argument& e) {
            throw RowError(static_cast<int>(i) + 1, e.what());
        }
    }

    struct Bucket {
        int cases = 0;
        double syntax = 0, structure = 0, key_fields = 0, weighted = 0;
        double completeness = 0;
        int completeness_cases = 0;
    };
    Bucket overall;
    std::vector<std::pair<std::string, Bucket>> by_op;  // first-seen order

    auto feed = [](Bucket& bucket, const RowReport& row) {
        ++bucket.cases;
        bucket.syntax += row.syntax;
        bucket.structure += row.structure;
        bucket.key_fields += row.key_fields;
        bucket.weighted += row.weighted;
        if (!std::isnan(row.completeness)) {
            bucket.completeness += row.completeness;
            ++bucket.completeness_cases;
        }
    };

    for (const RowReport& row : report.rows) {
        feed(overall, row);
        auto found = std::find_if(by_op.begin(), by_op.end(),
                                  [&](const auto& p) { return p.first == row.operation; });
        if (found == by_op.end()) {
            by_op.emplace_back(row.operation, Bucket{});
            found = std::prev(by_op.end());
        }
        feed(found->second, row);
    }

    Summary& summary = report.summary;
    summary.cases = overall.cases;
    summary.syntax = mean_or_nan(overall.syntax, overall.cases);
    summary.structure = mean_or_nan(overall.structure, overall.cases);
    summary.key_fields = mean_or_nan(overall.key_fields, overall.cases);
    summary.weighted = mean_or_nan(overall.weighted, overall.cases);
    summary.completeness = mean_or_nan(overall.completeness, overall.completeness_cases);
    summary.completeness_cases = overall.completeness_cases;
    for (const auto& [op, bucket] : by_op) {
        OperationSummary entry;
        entry.operation = op;
        entry.cases = bucket.cases;
        entry.syntax = mean_or_nan(bucket.syntax, bucket.cases);
        entry.structure = mean_or_nan(bucket.structure, bucket.cases);
        entry.key_fields = mean_or_nan(bucket.key_fields, bucket.cases);
        entry.completeness = mean_or_nan(bucket.completeness, bucket.completeness_cases);
        entry.weighted = mean_or_nan(bucket.weighted, bucket.cases);
        summary.per_operation.push_back(std::move(entry));
    }
    return report;
}

// ------------------------------------------------------------------- infer

std::vector<EvalRow> infer_dataset(const std::vector<CapturedPair>& dataset,
                                   Responder& backend, const InferOptions& options) {
    if (options.concurrency < 1)
        throw std::invalid_argument("concurrency must be at least 1");

    std::vector<EvalRow> rows(dataset.size());
    auto answer_one = [&](std::size_t i) {
        rows[i].input = dataset[i].input;
        rows[i].output = dataset[i].output;
        try {
            const Json request = Json::parse(dataset[i].input);
            const RespondOutcome outcome = backend.respond(request);
            std::string joined;
            for (std::size_t d = 0; d < outcome.documents.size(); ++d) {
                if (d) joined.push_back('\n');
                joined += jsonio::dump_document(outcome.documents[d]);
            }
            rows[i].prediction = std::move(joined);
        } catch (const std::exception&) {
            rows[i].prediction.clear();  // scored as a failed row, batch continues
        }
    };

    if (options.concurrency == 1 || dataset.size() < 2) {
        for (std::size_t i = 0; i < dataset.size(); ++i) answer_one(i);
        return rows;
    }

    std::atomic<std::size_t> next{0};
    const int workers =
        std::min<int>(options.concurrency, static_cast<int>(dataset.size()));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < rows.size(); i = next.fetch_add(1))
                answer_one(i);
        });
    for (std::thread& worker : pool) worker.join();
    return rows;
}

// --------------------------------------------------------------------- I/O

std::vector<EvalRow> read_eval_csv_file(const std::filesystem::path& path) {
    const auto records = csv::read_file(path);
    const std::vector<std::string> header = {"input", "output", "prediction"};
    if (records.empty() || records[0] != header)
        throw std::runtime_error("evaluation CSV " + path.string() +
                                 " is missing the input,output,prediction header");
    std::vector<EvalRow> rows;
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() == 1 && records[i][0].empty()) continue;  // blank line
        const int row_number = static_cast<int>(rows.size()) + 1;
        if (records[i].size() != 3)
            throw RowError(row_number, "expected 3 columns, found " +
                                           std::to_string(records[i].size()));
        EvalRow row{records[i][0], records[i][1], records[i][2]};
        if (!parse_request_info(row.input).ok)
            throw RowError(row_number, "input column is not a single request document");
        rows.push_back(std::move(row));
    }
    return rows;
}

int write_eval_csv_file(const std::vector<EvalRow>& rows,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write evaluation CSV: " + path.string());
    csv::write_row(out, {"input", "output", "prediction"});
    for (const EvalRow& row : rows)
        csv::write_row(out, {row.input, row.output, row.prediction});
    out.flush();
    if (!out) throw std::runtime_error("short write to evaluation CSV: " + path.string());
    return static_cast<int>(rows.size());
}

// --------------------------------------------------------------- reporting

namespace {

Json number_or_null(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

std::string metric_cell(double v) {
    if (std::isnan(v)) return "-";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.3f", v);
    return buffer;
}

}  // namespace

Json report_to_json(const EvalReport& report) {
    Json j = Json::object();
    Json rows = Json::array();
    for (const RowReport& row : report.rows) {
        Json r = Json::object();
        r["operation"] = row.operation;
        r["syntax"] = row.syntax;
        r["structure"] = row.structure;
        r["key_fields"] = row.key_fields;
        r["completeness"] = number_or_null(row.completeness);
        r["weighted"] = row.weighted;
        r["notes"] = row.notes;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);

    Json s = Json::object();
    s["cases"] = report.summary.cases;
    s["syntax"] = number_or_null(report.summary.syntax);
    s["structure"] = number_or_null(report.summary.structure);
    s["key_fields"] = number_or_null(report.summary.key_fields);
    s["completeness"] = number_or_null(report.summary.completeness);
    s["completeness_cases"] = report.summary.completeness_cases;
    s["weighted"] = number_or_null(report.summary.weighted);
    Json per_op = Json::array();
    for (const OperationSummary& entry : report.summary.per_operation) {
        Json e = Json::object();
        e["operation"] = entry.operation;
        e["cases"] = entry.cases;
        e["syntax"] = number_or_null(entry.syntax);
        e["structure"] = number_or_null(entry.structure);
        e["key_fields"] = number_or_null(entry.key_fields);
        e["completeness"] = number_or_null(entry.completeness);
        e["weighted"] = number_or_null(entry.weighted);
        per_op.push_back(std::move(e));
    }
    s["per_operation"] = std::move(per_op);
    j["summary"] = std::move(s);
    return j;
}

std::string report_to_text(const EvalReport& report) {
    std::string text;
    char line[200];
    std::snprintf(line, sizeof line, "%-16s %6s %8s %10s %11s %13s %9s\n", "operation",
                  "cases", "syntax", "structure", "key_fields", "completeness", "weighted");
    text += line;

    auto emit = [&](const std::string& name, int cases, double syntax, double structure,
                    double key_fields, double completeness, double weighted) {
        std::snprintf(line, sizeof line, "%-16s %6d %8s %10s %11s %13s %9s\n", name.c_str(),
                      cases, metric_cell(syntax).c_str(), metric_cell(structure).c_str(),
                      metric_cell(key_fields).c_str(), metric_cell(completeness).c_str(),
                      metric_cell(weighted).c_str());
        text += line;
    };

    for (const OperationSummary& entry : report.summary.per_operation)
        emit(entry.operation, entry.cases, entry.syntax, entry.structure, entry.key_fields,
             entry.completeness, entry.weighted);
    emit("overall", report.summary.cases, report.summary.syntax, report.summary.structure,
         report.summary.key_fields, report.summary.completeness, report.summary.weighted);
    return text;
}

}  // namespace ldapot::eval
