// message.cpp

#include "ldapot/message.hpp"

#include <array>
#include <utility>

namespace ldapot {

Filter Filter::and_of(std::vector<Filter> fs) {
    Filter f;
    f.kind = Kind::And;
    f.children = std::move(fs);
    return f;
}

Filter Filter::or_of(std::vector<Filter> fs) {
    Filter f;
    f.kind = Kind::Or;
    f.children = std::move(fs);
    return f;
}

Filter Filter::not_of(Filter inner) {
    Filter f;
    f.kind = Kind::Not;
    f.children.push_back(std::move(inner));
    return f;
}

Filter Filter::equality(std::string attr, Bytes v) {
    Filter f;
    f.kind = Kind::Equality;
    f.attribute = std::move(attr);
    f.value = std::move(v);
    return f;
}

Filter Filter::substrings(std::string attr, std::optional<Bytes> initial,
                          std::vector<Bytes> any, std::optional<Bytes> final_part) {
    Filter f;
    f.kind = Kind::Substrings;
    f.attribute = std::move(attr);
    f.initial = std::move(initial);
    f.any = std::move(any);
    f.final_part = std::move(final_part);
    return f;
}

Filter Filter::greater_or_equal(std::string attr, Bytes v) {
    Filter f;
    f.kind = Kind::GreaterOrEqual;
    f.attribute = std::move(attr);
    f.value = std::move(v);
    return f;
}

Filter Filter::less_or_equal(std::string attr, Bytes v) {
    Filter f;
    f.kind = Kind::LessOrEqual;
    f.attribute = std::move(attr);
    f.value = std::move(v);
    return f;
}

Filter Filter::present(std::string attr) {
    Filter f;
    f.kind = Kind::Present;
    f.attribute = std::move(attr);
    return f;
}

Filter Filter::approx(std::string attr, Bytes v) {
    Filter f;
    f.kind = Kind::Approx;
    f.attribute = std::move(attr);
    f.value = std::move(v);
    return f;
}

namespace {

struct OpInfo {
    std::string_view name;
    int tag;
};

struct OpVisitor {
    OpInfo operator()(const BindRequest&) const { return {"bindRequest", app_tag::bind_request}; }
    OpInfo operator()(const BindResponse&) const { return {"bindResponse", app_tag::bind_response}; }
    OpInfo operator()(const UnbindRequest&) const { return {"unbindRequest", app_tag::unbind_request}; }
    OpInfo operator()(const SearchRequest&) const { return {"searchRequest", app_tag::search_request}; }
    OpInfo operator()(const SearchResultEntry&) const { return {"searchResEntry", app_tag::search_res_entry}; }
    OpInfo operator()(const SearchResultDone&) const { return {"searchResDone", app_tag::search_res_done}; }
    OpInfo operator()(const SearchResultReference&) const { return {"searchResRef", app_tag::search_res_ref}; }
    OpInfo operator()(const ModifyRequest&) const { return {"modifyRequest", app_tag::modify_request}; }
    OpInfo operator()(const ModifyResponse&) const { return {"modifyResponse", app_tag::modify_response}; }
    OpInfo operator()(const AddRequest&) const { return {"addRequest", app_tag::add_request}; }
    OpInfo operator()(const AddResponse&) const { return {"addResponse", app_tag::add_response}; }
    OpInfo operator()(const DelRequest&) const { return {"delRequest", app_tag::del_request}; }
    OpInfo operator()(const DelResponse&) const { return {"delResponse", app_tag::del_response}; }
    OpInfo operator()(const ModifyDnRequest&) const { return {"modDNRequest", app_tag::mod_dn_request}; }
    OpInfo operator()(const ModifyDnResponse&) const { return {"modDNResponse", app_tag::mod_dn_response}; }
    OpInfo operator()(const CompareRequest&) const { return {"compareRequest", app_tag::compare_request}; }
    OpInfo operator()(const CompareResponse&) const { return {"compareResponse", app_tag::compare_response}; }
    OpInfo operator()(const AbandonRequest&) const { return {"abandonRequest", app_tag::abandon_request}; }
    OpInfo operator()(const ExtendedRequest&) const { return {"extendedReq", app_tag::extended_req}; }
    OpInfo operator()(const ExtendedResponse&) const { return {"extendedResp", app_tag::extended_resp}; }
};

}  // namespace

std::string_view op_name(const ProtocolOp& op) {
    return std::visit(OpVisitor{}, op).name;
}

int application_tag(const ProtocolOp& op) {
    return std::visit(OpVisitor{}, op).tag;
}

bool is_request_op(std::string_view name) {
    return name == "bindRequest" || name == "unbindRequest" || name == "searchRequest" ||
           name == "modifyRequest" || name == "addRequest" || name == "delRequest" ||
           name == "modDNRequest" || name == "compareRequest" || name == "abandonRequest" ||
           name == "extendedReq";
}

bool is_response_op(std::string_view name) {
    return name == "bindResponse" || name == "searchResEntry" || name == "searchResDone" ||
           name == "searchResRef" || name == "modifyResponse" || name == "addResponse" ||
           name == "delResponse" || name == "modDNResponse" || name == "compareResponse" ||
           name == "extendedResp";
}

std::optional<std::string_view> response_op_for(std::string_view request_op) {
    if (request_op == "bindRequest") return "bindResponse";
    if (request_op == "searchRequest") return "searchResDone";
    if (request_op == "modifyRequest") return "modifyResponse";
    if (request_op == "addRequest") return "addResponse";
    if (request_op == "delRequest") return "delResponse";
    if (request_op == "modDNRequest") return "modDNResponse";
    if (request_op == "compareRequest") return "compareResponse";
    if (request_op == "extendedReq") return "extendedResp";
    return std::nullopt;  // unbindRequest, abandonRequest, unknown
}

std::string_view result_code_name(std::int32_t code) {
    switch (code) {
        case result_code::success: return "success";
        case result_code::operations_error: return "operationsError";
        case result_code::protocol_error: return "protocolError";
        case result_code::time_limit_exceeded: return "timeLimitExceeded";
        case result_code::size_limit_exceeded: return "sizeLimitExceeded";
        case result_code::compare_false: return "compareFalse";
        case result_code::compare_true: return "compareTrue";
        case result_code::auth_method_not_supported: return "authMethodNotSupported";
        case result_code::stronger_auth_required: return "strongerAuthRequired";
        case result_code::referral: return "referral";
        case result_code::no_such_attribute: return "noSuchAttribute";
        case result_code::no_such_object: return "noSuchObject";
        case result_code::invalid_dn_syntax: return "invalidDNSyntax";
        case result_code::inappropriate_authentication: return "inappropriateAuthentication";
        case result_code::invalid_credentials: return "invalidCredentials";
        case result_code::insufficient_access_rights: return "insufficientAccessRights";
        case result_code::busy: return "busy";
        case result_code::unavailable: return "unavailable";
        case result_code::unwilling_to_perform: return "unwillingToPerform";
        case result_code::not_allowed_on_non_leaf: return "notAllowedOnNonLeaf";
        case result_code::entry_already_exists: return "entryAlreadyExists";
        case result_code::other: return "other";
        default: return "unknown";
    }
}

}  // namespace ldapot
