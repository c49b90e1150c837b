#pragma once

#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldapot/directory.hpp"
#include "ldapot/json_codec.hpp"

namespace ldapot {

// The backend could not produce a usable answer (connection failures after all
// retries, or a reply with nothing salvageable for an operation that requires
// a response). The listener maps this to an unavailable(52) result.
struct BackendUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResponderContext {
    enum class Mode { Automatic, Manual };

    Mode mode = Mode::Automatic;
    std::optional<std::string> base_dn;
    std::optional<std::string> language;
    std::optional<std::string> organization_type;

    // Manual mode must carry all three deployment hints; automatic mode none.
    // Throws std::invalid_argument otherwise.
    void validate() const;
};

struct BridgeConfig {
    // Absolute http:// URL of the model host, e.g. "http://10.0.0.5:8000/receive_data".
    // A URL without a path gets "/receive_data" appended.
    std::string endpoint_url;
    double request_timeout_seconds = 15.0;
    int max_retries = 2;     // re-attempts after the first try
    int retry_delay_ms = 100;

    void validate() const;   // throws std::invalid_argument
};

// Per-operation output allowances, in model tokens.
struct TokenBudgetTable {
    int single_response_op = 200;    // bind, compare, del, abandon, unbind
    int entry_mutation_op = 400;     // add, modify, modDN
    int extended_op = 600;
    int search_base = 300;
    int search_per_entry = 120;      // growth per expected result entry
    int search_entry_cap = 50;       // sizeLimits above this stop growing the budget
    int search_default_entries = 10; // assumed entry count when sizeLimit is 0 (unlimited)
    int default_budget = 1000;       // anything unrecognized
};

// Deterministic, total: unrecognized document shapes get the default budget.
int estimate_token_budget(const Json& request, const TokenBudgetTable& table = {});

struct SanitizedStream {
    std::vector<Json> documents;   // each parses and passes full message validation
    int discarded_blocks = 0;
    std::vector<std::string> notes;
};

// Carve raw backend output into validated documents, discarding (and counting)
// junk runs, truncated blocks, and JSON that fails message validation.
SanitizedStream sanitize_stream(const std::string& raw);

// Repair a search answer: drop documents that are not part of one, cut the
// stream at the first searchResDone, and guarantee the result ends with
// exactly one searchResDone carrying the request's messageID (synthesizing a
// success terminator when the stream lost its own).
std::vector<Json> ensure_search_closed(std::vector<Json> responses, const Json& request,
                                       std::vector<std::string>* repairs = nullptr);

struct RespondOutcome {
    std::vector<Json> documents;
    std::vector<std::string> repair_actions;
    int discarded_blocks = 0;
    int retries = 0;
};

class Responder {
public:
    virtual ~Responder() = default;

    virtual std::string label() const = 0;

    // Turn one request document into the ordered response documents to send.
    // Returns zero documents for abandonRequest/unbindRequest, at least one
    // for everything else. Throws BackendUnavailable when no usable answer can
    // be produced and std::invalid_argument when the input is not a valid
    // request-class document.
    virtual RespondOutcome respond(const Json& request) = 0;
};

// Deterministic responder backed by the in-memory directory. Mutating
// operations (add/delete/modify/modDN) take an exclusive lock; everything else
// runs under a shared lock, so concurrent sessions stay consistent.
class SimResponder : public Responder {
public:
    explicit SimResponder(Directory directory, SimOptions options = {});

    std::string label() const override;
    RespondOutcome respond(const Json& request) override;

    // Test/diagnostic access; not synchronized with in-flight respond calls.
    const Directory& directory() const { return directory_; }

private:
    Directory directory_;
    SimOptions options_;
    std::shared_mutex mutex_;
};

// Forwards each request to a remote model over HTTP and repairs the streamed
// reply. One POST per respond() call; the body is a JSON envelope
//   {"request": <document>, "mode": "auto"|"manual",
//    "context": {...} or null, "max_tokens": <budget>}
// and the response is read incrementally as newline-delimited JSON documents.
class BridgeResponder : public Responder {
public:
    BridgeResponder(BridgeConfig config, ResponderContext context,
                    TokenBudgetTable budgets = {});

    std::string label() const override;
    RespondOutcome respond(const Json& request) override;

    const BridgeConfig& config() const { return config_; }

private:
    BridgeConfig config_;
    ResponderContext context_;
    TokenBudgetTable budgets_;
    std::string base_url_;  // scheme://host:port
    std::string path_;      // request path, default /receive_data
};

}  // namespace ldapot
