// evaluator.hpp
//
// Response-quality scoring for (input, output, prediction) rows: five
// metrics per row, per-operation and overall aggregates, and the CSV/report
// plumbing around them.  `input` is one request document; `output` holds the
// reference response documents (newline-joined); `prediction` holds the
// candidate documents being judged.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldapot/capture.hpp"
#include "ldapot/json_codec.hpp"
#include "ldapot/responder.hpp"

namespace ldapot::eval {

// A dataset row that cannot be scored (e.g. the input column is not a
// request document).  `row()` is the 1-based data-row ordinal, header
// excluded.
class RowError : public std::runtime_error {
  public:
    RowError(int row, const std::string& message)
        : std::runtime_error("row " + std::to_string(row) + ": " + message), row_(row) {}
    int row() const { return row_; }

  private:
    int row_;
};

struct EvalRow {
    std::string input;       // request document
    std::string output;      // reference responses, newline-joined
    std::string prediction;  // candidate responses, newline-joined

    bool operator==(const EvalRow&) const = default;
};

// Per-metric weights for the final score.  Search rows use the four search_*
// weights as-is (they must sum to 1); other rows use the three other_*
// weights, divided by their sum when normalize_by_weight_sum is set so that
// perfect components score exactly 1.0.
struct WeightConfig {
    double search_syntax = 0.4;
    double search_structure = 0.3;
    double search_key_fields = 0.2;
    double search_completeness = 0.1;

    double other_syntax = 0.4;
    double other_structure = 0.4;
    double other_key_fields = 0.3;

    bool normalize_by_weight_sum = true;

    void validate() const;  // all weights >= 0; search weights sum to 1.0
};

struct EvalOptions {
    WeightConfig weights{};
    // Strict variant of the search shape rule: require at least one
    // searchResEntry before the searchResDone.  Off by default because
    // failed searches legitimately return none.
    bool require_search_entries = false;
    // Completeness = w*coverage + (1-w)*closing-searchResDone-present.
    double completeness_coverage_weight = 0.5;
};

// One scored row.  completeness is NaN exactly when the input is not a
// searchRequest; notes carry human-readable diagnostics for lost points.
struct RowReport {
    std::string operation;  // request op name, e.g. "bindRequest"
    int syntax = 0;
    int structure = 0;
    double key_fields = 0.0;
    double completeness = 0.0;  // NaN for non-search rows
    double weighted = 0.0;
    std::vector<std::string> notes;
};

// ----------------------------------------------------------------- metrics

// 1 iff every prediction document parses as JSON, maps to an LdapMessage,
// and re-encodes to BER; an empty prediction passes only for abandon/unbind.
int syntax_pass(const std::string& input, const std::string& prediction);

// 1 iff the prediction has exactly the response shape the request calls
// for: bind -> one bindResponse; search -> entries then one trailing
// searchResDone and nothing else; modify/add/del/modDN/compare/extended ->
// exactly one matching response; abandon/unbind -> nothing at all.
int structure_pass(const std::string& input, const std::string& prediction,
                   bool require_search_entries = false);

// Mean of two components: the fraction of prediction documents carrying the
// request's messageID, and the Jaccard similarity of the protocol-op name
// sets of reference vs prediction.
double key_field_accuracy(const std::string& input, const std::string& output,
                          const std::string& prediction);

// Search rows only (NaN otherwise): coverage of the reference entry count
// blended with the presence of a closing searchResDone.  When the reference
// has no parseable documents the expected count falls back to the request's
// sizeLimit, at least 1.
double completeness_score(const std::string& input, const std::string& output,
                          const std::string& prediction,
                          double coverage_weight = 0.5);

// Combine the four components using the search or non-search weights.
// completeness is ignored for non-search rows (pass NaN).
double weighted_validity(int syntax, int structure, double key_fields, double completeness,
                         bool is_search, const WeightConfig& weights = {});

// --------------------------------------------------------------- aggregate

struct OperationSummary {
    std::string operation;
    int cases = 0;
    double syntax = 0.0;
    double structure = 0.0;
    double key_fields = 0.0;
    double completeness = 0.0;  // NaN when no row of this class defines it
    double weighted = 0.0;
};

struct Summary {
    int cases = 0;
    double syntax = 0.0;        // means over all rows; NaN when cases == 0
    double structure = 0.0;
    double key_fields = 0.0;
    double completeness = 0.0;  // mean over rows where it is defined
    int completeness_cases = 0;
    double weighted = 0.0;
    std::vector<OperationSummary> per_operation;  // first-seen order
};

struct EvalReport {
    std::vector<RowReport> rows;
    Summary summary;
};

RowReport evaluate_row(const EvalRow& row, const EvalOptions& options = {});

// Scores every row and aggregates.  Throws RowError (1-based row number)
// when an input column does not parse as a request document.
EvalReport evaluate_dataset(const std::vector<EvalRow>& rows, const EvalOptions& options = {});

// ------------------------------------------------------------------ infer

struct InferOptions {
    // Concurrent backend calls.  Keep 1 for the simulator oracle (mutating
    // requests replay deterministically only in order); raise it for
    // stateless HTTP backends.
    int concurrency = 1;
};

// Ask the backend to answer each captured input; failures become empty
// predictions, never abort the batch.  Row order is preserved.
std::vector<EvalRow> infer_dataset(const std::vector<CapturedPair>& dataset,
                                   Responder& backend, const InferOptions& options = {});

// -------------------------------------------------------------------- I/O

// Three-column CSV, header "input,output,prediction".  Loading validates
// every input column (RowError).  Writing returns the data-row count.
std::vector<EvalRow> read_eval_csv_file(const std::filesystem::path& path);
int write_eval_csv_file(const std::vector<EvalRow>& rows, const std::filesystem::path& path);

// --------------------------------------------------------------- reporting

// Machine form: {"rows":[...],"summary":{...,"per_operation":[...]}}
// (undefined completeness serializes as null).
Json report_to_json(const EvalReport& report);

// Human form: an aligned table, one line per operation class plus an
// overall line; undefined completeness prints as "-".
std::string report_to_text(const EvalReport& report);

}  // namespace ldapot::eval
