// message.hpp
//
// RFC 4511 LDAPMessage domain model: the message envelope, the protocol-op
// choice, search filters, and the shared result/attribute pieces.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ldapot {

// Byte string; values are not required to be text.
using Bytes = std::string;

inline constexpr std::int32_t kMaxMessageId = 2147483647;  // 2^31 - 1

// LDAPResult resultCode values (RFC 4511, appendix A.1/A.2).  Unknown codes
// are preserved numerically, never rejected.
namespace result_code {
inline constexpr std::int32_t success = 0;
inline constexpr std::int32_t operations_error = 1;
inline constexpr std::int32_t protocol_error = 2;
inline constexpr std::int32_t time_limit_exceeded = 3;
inline constexpr std::int32_t size_limit_exceeded = 4;
inline constexpr std::int32_t compare_false = 5;
inline constexpr std::int32_t compare_true = 6;
inline constexpr std::int32_t auth_method_not_supported = 7;
inline constexpr std::int32_t stronger_auth_required = 8;
inline constexpr std::int32_t referral = 10;
inline constexpr std::int32_t no_such_attribute = 16;
inline constexpr std::int32_t no_such_object = 32;
inline constexpr std::int32_t invalid_dn_syntax = 34;
inline constexpr std::int32_t inappropriate_authentication = 48;
inline constexpr std::int32_t invalid_credentials = 49;
inline constexpr std::int32_t insufficient_access_rights = 50;
inline constexpr std::int32_t busy = 51;
inline constexpr std::int32_t unavailable = 52;
inline constexpr std::int32_t unwilling_to_perform = 53;
inline constexpr std::int32_t not_allowed_on_non_leaf = 66;
inline constexpr std::int32_t entry_already_exists = 68;
inline constexpr std::int32_t other = 80;
}  // namespace result_code

// Search filter tree.  And/Or/Not use children; leaf kinds use
// attribute/value; Substrings uses initial/any/final_part.
struct Filter {
    enum class Kind {
        And,
        Or,
        Not,
        Equality,
        Substrings,
        GreaterOrEqual,
        LessOrEqual,
        Present,
        Approx,
    };

    Kind kind = Kind::Present;
    std::vector<Filter> children;      // And/Or: >= 1 child, Not: exactly 1
    std::string attribute;
    Bytes value;
    std::optional<Bytes> initial;      // Substrings only
    std::vector<Bytes> any;            // Substrings only
    std::optional<Bytes> final_part;   // Substrings only

    bool operator==(const Filter&) const = default;

    static Filter and_of(std::vector<Filter> fs);
    static Filter or_of(std::vector<Filter> fs);
    static Filter not_of(Filter f);
    static Filter equality(std::string attr, Bytes v);
    static Filter substrings(std::string attr, std::optional<Bytes> initial,
                             std::vector<Bytes> any, std::optional<Bytes> final_part);
    static Filter greater_or_equal(std::string attr, Bytes v);
    static Filter less_or_equal(std::string attr, Bytes v);
    static Filter present(std::string attr);
    static Filter approx(std::string attr, Bytes v);
};

// Context tag numbers of the Filter choice on the wire.
namespace filter_tag {
inline constexpr int and_filter = 0;
inline constexpr int or_filter = 1;
inline constexpr int not_filter = 2;
inline constexpr int equality_match = 3;
inline constexpr int substrings = 4;
inline constexpr int greater_or_equal = 5;
inline constexpr int less_or_equal = 6;
inline constexpr int present = 7;
inline constexpr int approx_match = 8;
}  // namespace filter_tag

struct LdapResult {
    std::int32_t result_code = 0;
    std::string matched_dn;
    std::string diagnostic_message;
    std::optional<std::vector<std::string>> referral;

    bool operator==(const LdapResult&) const = default;
};

struct PartialAttribute {
    std::string type;
    std::vector<Bytes> vals;

    bool operator==(const PartialAttribute&) const = default;
};

namespace modify_op {
inline constexpr std::int32_t add = 0;
inline constexpr std::int32_t remove = 1;
inline constexpr std::int32_t replace = 2;
}  // namespace modify_op

struct ModifyChange {
    std::int32_t operation = modify_op::add;  // 0 add, 1 delete, 2 replace
    PartialAttribute modification;

    bool operator==(const ModifyChange&) const = default;
};

// --- protocol-op variants ----------------------------------------------------

struct BindRequest {
    std::int32_t version = 3;
    std::string name;
    Bytes simple_credentials;
    bool operator==(const BindRequest&) const = default;
};

struct BindResponse {
    LdapResult result;
    std::optional<Bytes> server_sasl_creds;
    bool operator==(const BindResponse&) const = default;
};

struct UnbindRequest {
    bool operator==(const UnbindRequest&) const = default;
};

namespace search_scope {
inline constexpr std::int32_t base_object = 0;
inline constexpr std::int32_t single_level = 1;
inline constexpr std::int32_t whole_subtree = 2;
}  // namespace search_scope

struct SearchRequest {
    std::string base_object;
    std::int32_t scope = search_scope::base_object;   // 0..2
    std::int32_t deref_aliases = 0;                   // 0..3
    std::int32_t size_limit = 0;
    std::int32_t time_limit = 0;
    bool types_only = false;
    Filter filter = Filter::present("objectClass");
    std::vector<std::string> attributes;
    bool operator==(const SearchRequest&) const = default;
};

struct SearchResultEntry {
    std::string object_name;
    std::vector<PartialAttribute> attributes;
    bool operator==(const SearchResultEntry&) const = default;
};

struct SearchResultDone {
    LdapResult result;
    bool operator==(const SearchResultDone&) const = default;
};

struct SearchResultReference {
    std::vector<std::string> uris;
    bool operator==(const SearchResultReference&) const = default;
};

struct ModifyRequest {
    std::string object;
    std::vector<ModifyChange> changes;
    bool operator==(const ModifyRequest&) const = default;
};

struct ModifyResponse {
    LdapResult result;
    bool operator==(const ModifyResponse&) const = default;
};

struct AddRequest {
    std::string entry;
    std::vector<PartialAttribute> attributes;
    bool operator==(const AddRequest&) const = default;
};

struct AddResponse {
    LdapResult result;
    bool operator==(const AddResponse&) const = default;
};

struct DelRequest {
    std::string dn;
    bool operator==(const DelRequest&) const = default;
};

struct DelResponse {
    LdapResult result;
    bool operator==(const DelResponse&) const = default;
};

struct ModifyDnRequest {
    std::string entry;
    std::string new_rdn;
    bool delete_old_rdn = false;
    std::optional<std::string> new_superior;
    bool operator==(const ModifyDnRequest&) const = default;
};

struct ModifyDnResponse {
    LdapResult result;
    bool operator==(const ModifyDnResponse&) const = default;
};

struct CompareRequest {
    std::string entry;
    std::string attribute_desc;
    Bytes assertion_value;
    bool operator==(const CompareRequest&) const = default;
};

struct CompareResponse {
    LdapResult result;
    bool operator==(const CompareResponse&) const = default;
};

struct AbandonRequest {
    std::int32_t id_to_abandon = 0;
    bool operator==(const AbandonRequest&) const = default;
};

struct ExtendedRequest {
    std::string request_name;  // OID
    std::optional<Bytes> request_value;
    bool operator==(const ExtendedRequest&) const = default;
};

struct ExtendedResponse {
    LdapResult result;
    std::optional<std::string> response_name;
    std::optional<Bytes> response_value;
    bool operator==(const ExtendedResponse&) const = default;
};

using ProtocolOp = std::variant<
    BindRequest, BindResponse, UnbindRequest, SearchRequest, SearchResultEntry,
    SearchResultDone, SearchResultReference, ModifyRequest, ModifyResponse,
    AddRequest, AddResponse, DelRequest, DelResponse, ModifyDnRequest,
    ModifyDnResponse, CompareRequest, CompareResponse, AbandonRequest,
    ExtendedRequest, ExtendedResponse>;

struct LdapMessage {
    std::int32_t message_id = 0;
    ProtocolOp op = UnbindRequest{};
    // Raw [0] Controls element captured verbatim and re-emitted on encode;
    // never interpreted.
    std::optional<Bytes> controls;

    bool operator==(const LdapMessage&) const = default;
};

// Fixed application tag numbers on the wire.
namespace app_tag {
inline constexpr int bind_request = 0;
inline constexpr int bind_response = 1;
inline constexpr int unbind_request = 2;
inline constexpr int search_request = 3;
inline constexpr int search_res_entry = 4;
inline constexpr int search_res_done = 5;
inline constexpr int modify_request = 6;
inline constexpr int modify_response = 7;
inline constexpr int add_request = 8;
inline constexpr int add_response = 9;
inline constexpr int del_request = 10;
inline constexpr int del_response = 11;
inline constexpr int mod_dn_request = 12;
inline constexpr int mod_dn_response = 13;
inline constexpr int compare_request = 14;
inline constexpr int compare_response = 15;
inline constexpr int abandon_request = 16;
inline constexpr int search_res_ref = 19;
inline constexpr int extended_req = 23;
inline constexpr int extended_resp = 24;
}  // namespace app_tag

// Wire/JSON name of the operation variant, e.g. "bindRequest".
std::string_view op_name(const ProtocolOp& op);
int application_tag(const ProtocolOp& op);

bool is_request_op(std::string_view name);
bool is_response_op(std::string_view name);

// The single response operation a request is answered with; empty for
// unbindRequest/abandonRequest (no response) and searchRequest callers that
// want the terminating op get "searchResDone".
std::optional<std::string_view> response_op_for(std::string_view request_op);

// Name of a well-known result code ("success", "noSuchObject", ...);
// "unknown" for codes outside the table.
std::string_view result_code_name(std::int32_t code);

}  // namespace ldapot
