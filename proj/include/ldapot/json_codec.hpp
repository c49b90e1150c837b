// json_codec.hpp
//
// Lossless bidirectional mapping between LdapMessage values and JSON
// documents ({"messageID": …, "protocolOp": {opName: {…}}}), plus splitting
// of concatenated/newline-delimited JSON streams.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ldapot/message.hpp"

namespace ldapot {

// Insertion-ordered so emitted documents keep a stable key order.
using Json = nlohmann::ordered_json;

namespace jsonio {

// Document shape violations: missing/unknown keys, wrong value types.
class SchemaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Right type, value outside what the wire format can carry.
class RangeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Json message_to_json(const LdapMessage& m);

// Inverse of message_to_json on its image.  Unknown keys are rejected.
LdapMessage json_to_message(const Json& doc);

// Parse text then map; SchemaError if the text is not a JSON object.
LdapMessage parse_document(std::string_view text);

// Canonical single-line form.
std::string dump_document(const Json& doc);

struct SplitResult {
    std::vector<std::string> documents;  // complete top-level JSON objects, in order
    std::string remainder;               // trailing incomplete fragment, "" if none
    int garbage_chunks = 0;              // skipped runs that were not valid JSON
};

// Carve complete top-level JSON objects out of free-form model output.
// Tolerant: junk between objects is skipped and counted, a truncated final
// object lands in remainder, and every returned document parses as JSON.
SplitResult split_json_stream(std::string_view text);

// Byte strings that are valid UTF-8 pass through; anything else (or a string
// that collides with the prefix) becomes "hex:<lowercase hex>".
std::string encode_byte_value(const Bytes& b);
Bytes decode_byte_value(const std::string& s);
bool is_valid_utf8(std::string_view s);

}  // namespace jsonio
}  // namespace ldapot
