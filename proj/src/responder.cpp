#include "ldapot/responder.hpp"

#include <httplib.h>

#include <chrono>
#include <mutex>
#include <thread>
#include <utility>

#include "ldapot/message.hpp"

namespace ldapot {
namespace {

// The operation key inside a document's protocolOp wrapper, without full
// validation. Nullopt when the shape is off.
std::optional<std::string> op_key_of(const Json& doc) {
    if (!doc.is_object() || !doc.contains("protocolOp")) return std::nullopt;
    const Json& wrapper = doc.at("protocolOp");
    if (!wrapper.is_object() || wrapper.size() != 1) return std::nullopt;
    return wrapper.items().begin().key();
}

std::optional<std::int64_t> message_id_of(const Json& doc) {
    if (!doc.is_object() || !doc.contains("messageID")) return std::nullopt;
    const Json& id = doc.at("messageID");
    if (!id.is_number_integer()) return std::nullopt;
    return id.get<std::int64_t>();
}

LdapMessage parse_request(const Json& request) {
    LdapMessage msg;
    try {
        msg = jsonio::json_to_message(request);
    } catch (const jsonio::SchemaError& e) {
        throw std::invalid_argument(std::string("respond needs a valid request document: ") + e.what());
    } catch (const jsonio::RangeError& e) {
        throw std::invalid_argument(std::string("respond needs a valid request document: ") + e.what());
    }
    if (!is_request_op(op_name(msg.op)))
        throw std::invalid_argument("respond needs a request-class document, got " +
                                    std::string(op_name(msg.op)));
    return msg;
}

Json synthesized_search_done(std::int64_t message_id) {
    LdapMessage done;
    done.message_id = static_cast<std::int32_t>(message_id);
    done.op = SearchResultDone{LdapResult{result_code::success, "", "", std::nullopt}};
    return jsonio::message_to_json(done);
}

// Extracts complete JSON blocks from an arriving byte stream, chunk by chunk.
struct StreamCollector {
    std::string pending;
    std::vector<std::string> blocks;
    int garbage_runs = 0;

    void feed(const char* data, std::size_t length) {
        pending.append(data, length);
        jsonio::SplitResult split = jsonio::split_json_stream(pending);
        for (std::string& block : split.documents) blocks.push_back(std::move(block));
        garbage_runs += split.garbage_chunks;
        pending = std::move(split.remainder);
    }
};

}  // namespace

void ResponderContext::validate() const {
    const bool have_all = base_dn && language && organization_type;
    const bool have_none = !base_dn && !language && !organization_type;
    if (mode == Mode::Manual && !have_all)
        throw std::invalid_argument(
            "manual mode requires base_dn, language, and organization_type");
    if (mode == Mode::Automatic && !have_none)
        throw std::invalid_argument(
            "automatic mode must not carry deployment hints");
}

void BridgeConfig::validate() const {
    if (endpoint_url.rfind("http://", 0) != 0)
        throw std::invalid_argument("endpoint_url must be an absolute http:// URL");
    if (endpoint_url.size() <= 7 || endpoint_url[7] == '/')
        throw std::invalid_argument("endpoint_url is missing a host");
    if (!(request_timeout_seconds > 0))
        throw std::invalid_argument("request_timeout_seconds must be positive");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (retry_delay_ms < 0) throw std::invalid_argument("retry_delay_ms must be >= 0");
}

int estimate_token_budget(const Json& request, const TokenBudgetTable& table) {
    const std::optional<std::string> op = op_key_of(request);
    if (!op) return table.default_budget;

    if (*op == "bindRequest" || *op == "compareRequest" || *op == "delRequest" ||
        *op == "abandonRequest" || *op == "unbindRequest")
        return table.single_response_op;
    if (*op == "addRequest" || *op == "modifyRequest" || *op == "modDNRequest")
        return table.entry_mutation_op;
    if (*op == "extendedReq") return table.extended_op;
    if (*op == "searchRequest") {
        std::int64_t size_limit = 0;
        const Json& body = request.at("protocolOp").at(*op);
        if (body.is_object() && body.contains("sizeLimit") &&
            body.at("sizeLimit").is_number_integer())
            size_limit = std::max<std::int64_t>(0, body.at("sizeLimit").get<std::int64_t>());
        const std::int64_t expected =
            std::min<std::int64_t>(size_limit == 0 ? table.search_default_entries : size_limit,
                                   table.search_entry_cap);
        return table.search_base + static_cast<int>(table.search_per_entry * expected);
    }
    return table.default_budget;
}

SanitizedStream sanitize_stream(const std::string& raw) {
    jsonio::SplitResult split = jsonio::split_json_stream(raw);

    SanitizedStream out;
    if (split.garbage_chunks > 0) {
        out.discarded_blocks += split.garbage_chunks;
        out.notes.push_back("discarded " + std::to_string(split.garbage_chunks) +
                            " non-JSON text run(s)");
    }
    if (!split.remainder.empty()) {
        ++out.discarded_blocks;
        out.notes.push_back("discarded truncated trailing block (" +
                            std::to_string(split.remainder.size()) + " bytes)");
    }
    for (const std::string& block : split.documents) {
        try {
            jsonio::parse_document(block);
            out.documents.push_back(Json::parse(block));
        } catch (const std::exception& e) {
            ++out.discarded_blocks;
            out.notes.push_back(std::string("discarded block failing validation: ") + e.what());
        }
    }
    return out;
}

std::vector<Json> ensure_search_closed(std::vector<Json> responses, const Json& request,
                                       std::vector<std::string>* repairs) {
    auto note = [repairs](std::string text) {
        if (repairs) repairs->push_back(std::move(text));
    };
    const std::int64_t request_id = message_id_of(request).value_or(0);

    std::vector<Json> kept;
    bool closed = false;
    int dropped_after_done = 0;
    for (Json& doc : responses) {
        if (closed) {
            ++dropped_after_done;
            continue;
        }
        const std::optional<std::string> op = op_key_of(doc);
        if (op == "searchResEntry" || op == "searchResRef") {
            kept.push_back(std::move(doc));
        } else if (op == "searchResDone") {
            if (message_id_of(doc) == request_id) {
                kept.push_back(std::move(doc));
            } else {
                note("replaced searchResDone carrying the wrong messageID");
            }
            closed = true;
        } else {
            note("dropped non-search document (" + op.value_or("?") + ")");
        }
    }
    if (dropped_after_done > 0)
        note("dropped " + std::to_string(dropped_after_done) +
             " document(s) after the stream terminator");

    const bool properly_closed =
        !kept.empty() && op_key_of(kept.back()) == "searchResDone";
    if (!properly_closed) {
        kept.push_back(synthesized_search_done(request_id));
        note("synthesized closing searchResDone for messageID " + std::to_string(request_id));
    }
    return kept;
}

SimResponder::SimResponder(Directory directory, SimOptions options)
    : directory_(std::move(directory)), options_(options) {}

std::string SimResponder::label() const { return "sim"; }

RespondOutcome SimResponder::respond(const Json& request) {
    const LdapMessage msg = parse_request(request);
    const std::string_view op = op_name(msg.op);
    const bool mutates = op == "addRequest" || op == "delRequest" ||
                         op == "modifyRequest" || op == "modDNRequest";

    RespondOutcome out;
    if (mutates) {
        std::unique_lock lock(mutex_);
        out.documents = respond_sim(request, directory_, options_);
    } else {
        std::shared_lock lock(mutex_);
        out.documents = respond_sim(request, directory_, options_);
    }
    return out;
}

BridgeResponder::BridgeResponder(BridgeConfig config, ResponderContext context,
                                 TokenBudgetTable budgets)
    : config_(std::move(config)), context_(std::move(context)), budgets_(budgets) {
    config_.validate();
    context_.validate();
    const std::size_t path_start = config_.endpoint_url.find('/', 7);
    if (path_start == std::string::npos) {
        base_url_ = config_.endpoint_url;
        path_ = "/receive_data";
    } else {
        base_url_ = config_.endpoint_url.substr(0, path_start);
        path_ = config_.endpoint_url.substr(path_start);
    }
}

std::string BridgeResponder::label() const { return "bridge"; }

RespondOutcome BridgeResponder::respond(const Json& request) {
    const LdapMessage msg = parse_request(request);
    const std::string op(op_name(msg.op));

    RespondOutcome out;
    if (op == "abandonRequest" || op == "unbindRequest") return out;

    Json envelope = Json::object();
    envelope["request"] = request;
    envelope["mode"] = context_.mode == ResponderContext::Mode::Manual ? "manual" : "auto";
    if (context_.mode == ResponderContext::Mode::Manual) {
        envelope["context"] = Json{{"base_dn", *context_.base_dn},
                                   {"language", *context_.language},
                                   {"organization_type", *context_.organization_type}};
    } else {
        envelope["context"] = nullptr;
    }
    envelope["max_tokens"] = estimate_token_budget(request, budgets_);

    // One POST per attempt; a failed attempt's partial stream is thrown away.
    StreamCollector committed;
    std::string last_error = "no attempts made";
    bool delivered = false;
    const auto timeout = std::chrono::microseconds(
        static_cast<std::int64_t>(config_.request_timeout_seconds * 1e6));
    for (int attempt = 0; attempt <= config_.max_retries && !delivered; ++attempt) {
        if (attempt > 0) {
            ++out.retries;
            if (config_.retry_delay_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_delay_ms));
        }

        httplib::Client client(base_url_);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        StreamCollector collector;
        int status = 0;
        httplib::Request req;
        req.method = "POST";
        req.path = path_;
        req.set_header("Content-Type", "application/json");
        req.body = envelope.dump();
        req.response_handler = [&status](const httplib::Response& response) {
            status = response.status;
            return true;
        };
        req.content_receiver = [&status, &collector](const char* data, std::size_t length,
                                                     std::uint64_t, std::uint64_t) {
            if (status == 200) collector.feed(data, length);
            return true;
        };

        httplib::Response response;
        httplib::Error error = httplib::Error::Success;
        const bool sent = client.send(req, response, error);
        if (sent && status == 200) {
            committed = std::move(collector);
            delivered = true;
        } else if (!sent || error != httplib::Error::Success) {
            last_error = httplib::to_string(error);
        } else {
            last_error = "HTTP status " + std::to_string(status);
        }
    }
    if (!delivered)
        throw BackendUnavailable("bridge endpoint " + config_.endpoint_url + " failed after " +
                                 std::to_string(config_.max_retries + 1) +
                                 " attempt(s): " + last_error);

    // Validate the collected blocks the same way sanitize_stream would.
    std::vector<Json> documents;
    if (committed.garbage_runs > 0) {
        out.discarded_blocks += committed.garbage_runs;
        out.repair_actions.push_back("discarded " + std::to_string(committed.garbage_runs) +
                                     " non-JSON text run(s)");
    }
    if (!committed.pending.empty()) {
        ++out.discarded_blocks;
        out.repair_actions.push_back("discarded truncated trailing block (" +
                                     std::to_string(committed.pending.size()) + " bytes)");
    }
    for (const std::string& block : committed.blocks) {
        try {
            jsonio::parse_document(block);
            documents.push_back(Json::parse(block));
        } catch (const std::exception& e) {
            ++out.discarded_blocks;
            out.repair_actions.push_back(std::string("discarded block failing validation: ") +
                                         e.what());
        }
    }

    // Never emit request-class documents.
    {
        std::vector<Json> responses_only;
        for (Json& doc : documents) {
            const std::optional<std::string> key = op_key_of(doc);
            if (key && is_request_op(*key)) {
                out.repair_actions.push_back("dropped request-class document (" + *key + ")");
            } else {
                responses_only.push_back(std::move(doc));
            }
        }
        documents = std::move(responses_only);
    }

    if (op == "searchRequest") {
        documents = ensure_search_closed(std::move(documents), request, &out.repair_actions);
        const std::int64_t size_limit = std::get<SearchRequest>(msg.op).size_limit;
        if (size_limit > 0) {
            std::vector<Json> capped;
            std::int64_t entries = 0;
            int truncated = 0;
            for (Json& doc : documents) {
                if (op_key_of(doc) == "searchResEntry" && ++entries > size_limit) {
                    ++truncated;
                    continue;
                }
                capped.push_back(std::move(doc));
            }
            if (truncated > 0)
                out.repair_actions.push_back("truncated " + std::to_string(truncated) +
                                             " entries beyond sizeLimit " +
                                             std::to_string(size_limit));
            documents = std::move(capped);
        }
    } else {
        const std::string expected(response_op_for(op).value_or(""));
        std::vector<Json> matching;
        for (Json& doc : documents) {
            const std::optional<std::string> key = op_key_of(doc);
            if (key == expected) {
                if (matching.empty()) {
                    matching.push_back(std::move(doc));
                } else {
                    out.repair_actions.push_back("dropped extra " + expected + " document");
                }
            } else {
                out.repair_actions.push_back("dropped unrelated document (" +
                                             key.value_or("?") + ")");
            }
        }
        if (matching.empty())
            throw BackendUnavailable("backend produced no usable " + expected +
                                     " for messageID " + std::to_string(msg.message_id));
        documents = std::move(matching);
    }

    // Identifier mismatches are observed, not rewritten.
    for (const Json& doc : documents) {
        const std::optional<std::int64_t> id = message_id_of(doc);
        if (id && *id != msg.message_id)
            out.repair_actions.push_back("response messageID " + std::to_string(*id) +
                                         " differs from request messageID " +
                                         std::to_string(msg.message_id) + " (left unchanged)");
    }

    out.documents = std::move(documents);
    return out;
}

}  // namespace ldapot
