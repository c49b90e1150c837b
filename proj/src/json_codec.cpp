// json_codec.cpp

#include "ldapot/json_codec.hpp"

#include <set>

namespace ldapot::jsonio {

namespace {

// ---------------------------------------------------------------- to json --

Json result_to_json(const LdapResult& r) {
    Json j = Json::object();
    j["resultCode"] = r.result_code;
    j["matchedDN"] = encode_byte_value(r.matched_dn);
    j["diagnosticMessage"] = encode_byte_value(r.diagnostic_message);
    if (r.referral) {
        Json uris = Json::array();
        for (const std::string& u : *r.referral) uris.push_back(encode_byte_value(u));
        j["referral"] = std::move(uris);
    }
    return j;
}

Json attributes_to_json(const std::vector<PartialAttribute>& attrs) {
    Json list = Json::array();
    for (const PartialAttribute& a : attrs) {
        Json ja = Json::object();
        ja["type"] = encode_byte_value(a.type);
        Json vals = Json::array();
        for (const Bytes& v : a.vals) vals.push_back(encode_byte_value(v));
        ja["vals"] = std::move(vals);
        list.push_back(std::move(ja));
    }
    return list;
}

Json ava_to_json(const std::string& attr, const Bytes& value) {
    Json j = Json::object();
    j["attributeDesc"] = encode_byte_value(attr);
    j["assertionValue"] = encode_byte_value(value);
    return j;
}

Json filter_to_json(const Filter& f) {
    Json j = Json::object();
    switch (f.kind) {
        case Filter::Kind::And:
        case Filter::Kind::Or: {
            Json kids = Json::array();
            for (const Filter& c : f.children) kids.push_back(filter_to_json(c));
            j[f.kind == Filter::Kind::And ? "and" : "or"] = std::move(kids);
            break;
        }
        case Filter::Kind::Not:
            j["not"] = filter_to_json(f.children.at(0));
            break;
        case Filter::Kind::Equality:
            j["equalityMatch"] = ava_to_json(f.attribute, f.value);
            break;
        case Filter::Kind::GreaterOrEqual:
            j["greaterOrEqual"] = ava_to_json(f.attribute, f.value);
            break;
        case Filter::Kind::LessOrEqual:
            j["lessOrEqual"] = ava_to_json(f.attribute, f.value);
            break;
        case Filter::Kind::Approx:
            j["approxMatch"] = ava_to_json(f.attribute, f.value);
            break;
        case Filter::Kind::Substrings: {
            Json s = Json::object();
            s["type"] = encode_byte_value(f.attribute);
            if (f.initial) s["initial"] = encode_byte_value(*f.initial);
            if (!f.any.empty()) {
                Json any = Json::array();
                for (const Bytes& a : f.any) any.push_back(encode_byte_value(a));
                s["any"] = std::move(any);
            }
            if (f.final_part) s["final"] = encode_byte_value(*f.final_part);
            j["substrings"] = std::move(s);
            break;
        }
        case Filter::Kind::Present: {
            Json p = Json::object();
            p["attributeDesc"] = encode_byte_value(f.attribute);
            j["present"] = std::move(p);
            break;
        }
    }
    return j;
}

struct OpToJson {
    Json operator()(const BindRequest& o) const {
        Json j = Json::object();
        j["version"] = o.version;
        j["name"] = encode_byte_value(o.name);
        j["simple"] = encode_byte_value(o.simple_credentials);
        return j;
    }
    Json operator()(const BindResponse& o) const {
        Json j = result_to_json(o.result);
        if (o.server_sasl_creds) j["serverSaslCreds"] = encode_byte_value(*o.server_sasl_creds);
        return j;
    }
    Json operator()(const UnbindRequest&) const { return Json::object(); }
    Json operator()(const SearchRequest& o) const {
        Json j = Json::object();
        j["baseObject"] = encode_byte_value(o.base_object);
        j["scope"] = o.scope;
        if (o.deref_aliases != 0) j["derefAliases"] = o.deref_aliases;
        j["sizeLimit"] = o.size_limit;
        if (o.time_limit != 0) j["timeLimit"] = o.time_limit;
        if (o.types_only) j["typesOnly"] = true;
        j["filter"] = filter_to_json(o.filter);
        Json attrs = Json::array();
        for (const std::string& a : o.attributes) attrs.push_back(encode_byte_value(a));
        j["attributes"] = std::move(attrs);
        return j;
    }
    Json operator()(const SearchResultEntry& o) const {
        Json j = Json::object();
        j["objectName"] = encode_byte_value(o.object_name);
        j["attributes"] = attributes_to_json(o.attributes);
        return j;
    }
    Json operator()(const SearchResultDone& o) const { return result_to_json(o.result); }
    Json operator()(const SearchResultReference& o) const {
        Json j = Json::object();
        Json uris = Json::array();
        for (const std::string& u : o.uris) uris.push_back(encode_byte_value(u));
        j["uris"] = std::move(uris);
        return j;
    }
    Json operator()(const ModifyRequest& o) const {
        Json j = Json::object();
        j["object"] = encode_byte_value(o.object);
        Json changes = Json::array();
        for (const ModifyChange& c : o.changes) {
            Json jc = Json::object();
            jc["operation"] = c.operation;
            Json mod = Json::object();
            mod["type"] = encode_byte_value(c.modification.type);
            Json vals = Json::array();
            for (const Bytes& v : c.modification.vals) vals.push_back(encode_byte_value(v));
            mod["vals"] = std::move(vals);
            jc["modification"] = std::move(mod);
            changes.push_back(std::move(jc));
        }
        j["changes"] = std::move(changes);
        return j;
    }
    Json operator()(const ModifyResponse& o) const { return result_to_json(o.result); }
    Json operator()(const AddRequest& o) const {
        Json j = Json::object();
        j["entry"] = encode_byte_value(o.entry);
        j["attributes"] = attributes_to_json(o.attributes);
        return j;
    }
    Json operator()(const AddResponse& o) const { return result_to_json(o.result); }
    Json operator()(const DelRequest& o) const {
        Json j = Json::object();
        j["entry"] = encode_byte_value(o.dn);
        return j;
    }
    Json operator()(const DelResponse& o) const { return result_to_json(o.result); }
    Json operator()(const ModifyDnRequest& o) const {
        Json j = Json::object();
        j["entry"] = encode_byte_value(o.entry);
        j["newrdn"] = encode_byte_value(o.new_rdn);
        j["deleteoldrdn"] = o.delete_old_rdn;
        if (o.new_superior) j["newSuperior"] = encode_byte_value(*o.new_superior);
        return j;
    }
    Json operator()(const ModifyDnResponse& o) const { return result_to_json(o.result); }
    Json operator()(const CompareRequest& o) const {
        Json j = Json::object();
        j["entry"] = encode_byte_value(o.entry);
        j["attributeDesc"] = encode_byte_value(o.attribute_desc);
        j["assertionValue"] = encode_byte_value(o.assertion_value);
        return j;
    }
    Json operator()(const CompareResponse& o) const { return result_to_json(o.result); }
    Json operator()(const AbandonRequest& o) const {
        Json j = Json::object();
        j["messageID"] = o.id_to_abandon;
        return j;
    }
    Json operator()(const ExtendedRequest& o) const {
        Json j = Json::object();
        j["requestName"] = encode_byte_value(o.request_name);
        if (o.request_value) j["requestValue"] = encode_byte_value(*o.request_value);
        return j;
    }
    Json operator()(const ExtendedResponse& o) const {
        Json j = result_to_json(o.result);
        if (o.response_name) j["responseName"] = encode_byte_value(*o.response_name);
        if (o.response_value) j["responseValue"] = encode_byte_value(*o.response_value);
        return j;
    }
};

// -------------------------------------------------------------- from json --

class ObjectReader {
  public:
    ObjectReader(const Json& j, std::string what) : obj_(j), what_(std::move(what)) {
        if (!j.is_object()) throw SchemaError(what_ + " must be a JSON object");
    }

    bool has(const char* key) {
        return obj_.contains(key);
    }

    const Json& require(const char* key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) throw SchemaError(what_ + " is missing \"" + key + "\"");
        seen_.insert(key);
        return *it;
    }

    const Json* optional(const char* key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    std::int32_t require_int(const char* key, std::int64_t lo, std::int64_t hi) {
        return as_int(require(key), key, lo, hi);
    }

    std::int32_t optional_int(const char* key, std::int64_t lo, std::int64_t hi,
                              std::int32_t fallback) {
        const Json* v = optional(key);
        if (v == nullptr) return fallback;
        return as_int(*v, key, lo, hi);
    }

    std::string require_string(const char* key) { return as_string(require(key), key); }

    bool optional_bool(const char* key, bool fallback) {
        const Json* v = optional(key);
        if (v == nullptr) return fallback;
        if (!v->is_boolean()) throw SchemaError(what_ + "." + key + " must be a boolean");
        return v->get<bool>();
    }

    // every key must have been visited
    void no_extras() {
        for (const auto& item : obj_.items())
            if (!seen_.contains(item.key()))
                throw SchemaError(what_ + " has unknown key \"" + item.key() + "\"");
    }

    std::int32_t as_int(const Json& v, const char* key, std::int64_t lo, std::int64_t hi) {
        if (!v.is_number_integer())
            throw SchemaError(what_ + "." + key + " must be an integer");
        std::int64_t n = v.get<std::int64_t>();
        if (n < lo || n > hi)
            throw RangeError(what_ + "." + key + " out of range");
        return static_cast<std::int32_t>(n);
    }

    std::string as_string(const Json& v, const char* key) {
        if (!v.is_string()) throw SchemaError(what_ + "." + key + " must be a string");
        return decode_byte_value(v.get<std::string>());
    }

  private:
    const Json& obj_;
    std::string what_;
    std::set<std::string> seen_;
};

std::vector<Bytes> string_array(const Json& v, const std::string& what) {
    if (!v.is_array()) throw SchemaError(what + " must be an array");
    std::vector<Bytes> out;
    for (const Json& e : v) {
        if (!e.is_string()) throw SchemaError(what + " elements must be strings");
        out.push_back(decode_byte_value(e.get<std::string>()));
    }
    return out;
}

PartialAttribute attribute_from_json(const Json& v, const std::string& what) {
    ObjectReader r(v, what);
    PartialAttribute a;
    a.type = r.require_string("type");
    a.vals = string_array(r.require("vals"), what + ".vals");
    r.no_extras();
    return a;
}

std::vector<PartialAttribute> attributes_from_json(const Json& v, const std::string& what) {
    if (!v.is_array()) throw SchemaError(what + " must be an array");
    std::vector<PartialAttribute> out;
    for (const Json& e : v) out.push_back(attribute_from_json(e, what + " element"));
    return out;
}

LdapResult result_from_reader(ObjectReader& r) {
    LdapResult result;
    result.result_code = r.require_int("resultCode", 0, kMaxMessageId);
    result.matched_dn = r.require_string("matchedDN");
    result.diagnostic_message = r.require_string("diagnosticMessage");
    if (const Json* ref = r.optional("referral")) {
        auto uris = string_array(*ref, "referral");
        result.referral = std::vector<std::string>(uris.begin(), uris.end());
    }
    return result;
}

Filter filter_from_json(const Json& v, int depth) {
    if (depth > 64) throw SchemaError("filter nesting too deep");
    if (!v.is_object() || v.size() != 1)
        throw SchemaError("filter must be a single-key object");
    const std::string kind = v.begin().key();
    const Json& body = *v.begin();
    auto ava = [&](Filter::Kind k) {
        ObjectReader r(body, "filter." + kind);
        Filter f;
        f.kind = k;
        f.attribute = r.require_string("attributeDesc");
        f.value = r.require_string("assertionValue");
        r.no_extras();
        return f;
    };
    if (kind == "and" || kind == "or") {
        if (!body.is_array() || body.empty())
            throw SchemaError("filter." + kind + " must be a non-empty array");
        std::vector<Filter> kids;
        for (const Json& c : body) kids.push_back(filter_from_json(c, depth + 1));
        return kind == "and" ? Filter::and_of(std::move(kids)) : Filter::or_of(std::move(kids));
    }
    if (kind == "not") return Filter::not_of(filter_from_json(body, depth + 1));
    if (kind == "equalityMatch") return ava(Filter::Kind::Equality);
    if (kind == "greaterOrEqual") return ava(Filter::Kind::GreaterOrEqual);
    if (kind == "lessOrEqual") return ava(Filter::Kind::LessOrEqual);
    if (kind == "approxMatch") return ava(Filter::Kind::Approx);
    if (kind == "present") {
        ObjectReader r(body, "filter.present");
        Filter f = Filter::present(r.require_string("attributeDesc"));
        r.no_extras();
        return f;
    }
    if (kind == "substrings") {
        ObjectReader r(body, "filter.substrings");
        Filter f;
        f.kind = Filter::Kind::Substrings;
        f.attribute = r.require_string("type");
        if (const Json* i = r.optional("initial"))
            f.initial = r.as_string(*i, "initial");
        if (const Json* a = r.optional("any")) f.any = string_array(*a, "substrings.any");
        if (const Json* fin = r.optional("final"))
            f.final_part = r.as_string(*fin, "final");
        r.no_extras();
        if (!f.initial && f.any.empty() && !f.final_part)
            throw SchemaError("filter.substrings needs at least one component");
        return f;
    }
    throw SchemaError("unknown filter kind \"" + kind + "\"");
}

ProtocolOp op_from_json(const std::string& name, const Json& body) {
    ObjectReader r(body, "protocolOp." + name);
    if (name == "bindRequest") {
        BindRequest o;
        o.version = r.require_int("version", 0, kMaxMessageId);
        o.name = r.require_string("name");
        o.simple_credentials = r.require_string("simple");
        r.no_extras();
        return o;
    }
    if (name == "bindResponse") {
        BindResponse o;
        o.result = result_from_reader(r);
        if (const Json* c = r.optional("serverSaslCreds"))
            o.server_sasl_creds = r.as_string(*c, "serverSaslCreds");
        r.no_extras();
        return o;
    }
    if (name == "unbindRequest") {
        r.no_extras();
        return UnbindRequest{};
    }
    if (name == "searchRequest") {
        SearchRequest o;
        o.base_object = r.require_string("baseObject");
        o.scope = r.require_int("scope", 0, 2);
        o.deref_aliases = r.optional_int("derefAliases", 0, 3, 0);
        o.size_limit = r.optional_int("sizeLimit", 0, kMaxMessageId, 0);
        o.time_limit = r.optional_int("timeLimit", 0, kMaxMessageId, 0);
        o.types_only = r.optional_bool("typesOnly", false);
        o.filter = filter_from_json(r.require("filter"), 0);
        auto attrs = string_array(r.require("attributes"), "attributes");
        o.attributes = std::vector<std::string>(attrs.begin(), attrs.end());
        r.no_extras();
        return o;
    }
    if (name == "searchResEntry") {
        SearchResultEntry o;
        o.object_name = r.require_string("objectName");
        o.attributes = attributes_from_json(r.require("attributes"), "attributes");
        r.no_extras();
        return o;
    }
    if (name == "searchResDone") {
        SearchResultDone o;
        o.result = result_from_reader(r);
        r.no_extras();
        return o;
    }
    if (name == "searchResRef") {
        SearchResultReference o;
        auto uris = string_array(r.require("uris"), "uris");
        o.uris = std::vector<std::string>(uris.begin(), uris.end());
        if (o.uris.empty()) throw SchemaError("searchResRef.uris must not be empty");
        r.no_extras();
        return o;
    }
    if (name == "modifyRequest") {
        ModifyRequest o;
        o.object = r.require_string("object");
        const Json& changes = r.require("changes");
        if (!changes.is_array()) throw SchemaError("modifyRequest.changes must be an array");
        for (const Json& c : changes) {
            ObjectReader cr(c, "change");
            ModifyChange ch;
            ch.operation = cr.require_int("operation", 0, 2);
            ch.modification = attribute_from_json(cr.require("modification"), "modification");
            cr.no_extras();
            o.changes.push_back(std::move(ch));
        }
        r.no_extras();
        return o;
    }
    if (name == "modifyResponse") {
        ModifyResponse o;
        o.result = result_from_reader(r);
        r.no_extras();
        return o;
    }
    if (name == "addRequest") {
        AddRequest o;
        o.entry = r.require_string("entry");
        o.attributes = attributes_from_json(r.require("attributes"), "attributes");
        r.no_extras();
        return o;
    }
    if (name == "addResponse") {
        AddResponse o;
        o.result = result_from_reader(r);
        r.no_extras();
        return o;
    }
    if (name == "delRequest") {
        DelRequest o;
        o.dn = r.require_string("entry");
        r.no_extras();
        return o;
    }
    if (name == "delResponse") {
        DelResponse o;
        o.result = result_from_reader(r);
        r.no_extras();
        return o;
    }
    if (name == "modDNRequest") {
        ModifyDnRequest o;
        o.entry = r.require_string("entry");
        o.new_rdn = r.require_string("newrdn");
        const Json& del = r.require("deleteoldrdn");
        if (!del.is_boolean()) throw SchemaError("modDNRequest.deleteoldrdn must be a boolean");
        o.delete_old_rdn = del.get<bool>();
        if (const Json* s = r.optional("newSuperior"))
            o.new_superior = r.as_string(*s, "newSuperior");
        r.no_extras();
        return o;
    }
    if (name == "modDNResponse") {
        ModifyDnResponse o;
        o.result = result_from_reader(r);
        r.no_extras();
        return o;
    }
    if (name == "compareRequest") {
        CompareRequest o;
        o.entry = r.require_string("entry");
        o.attribute_desc = r.require_string("attributeDesc");
        o.assertion_value = r.require_string("assertionValue");
        r.no_extras();
        return o;
    }
    if (name == "compareResponse") {
        CompareResponse o;
        o.result = result_from_reader(r);
        r.no_extras();
        return o;
    }
    if (name == "abandonRequest") {
        AbandonRequest o;
        o.id_to_abandon = r.require_int("messageID", 0, kMaxMessageId);
        r.no_extras();
        return o;
    }
    if (name == "extendedReq") {
        ExtendedRequest o;
        o.request_name = r.require_string("requestName");
        if (const Json* v = r.optional("requestValue"))
            o.request_value = r.as_string(*v, "requestValue");
        r.no_extras();
        return o;
    }
    if (name == "extendedResp") {
        ExtendedResponse o;
        o.result = result_from_reader(r);
        if (const Json* n = r.optional("responseName"))
            o.response_name = r.as_string(*n, "responseName");
        if (const Json* v = r.optional("responseValue"))
            o.response_value = r.as_string(*v, "responseValue");
        r.no_extras();
        return o;
    }
    throw SchemaError("unknown operation \"" + name + "\"");
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        std::uint32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates and values beyond U+10FFFF are invalid
        if (len == 2 && cp < 0x80) return false;
        if (len == 3 && cp < 0x800) return false;
        if (len == 4 && cp < 0x10000) return false;
        if (cp >= 0xD800 && cp <= 0xDFFF) return false;
        if (cp > 0x10FFFF) return false;
        i += len;
    }
    return true;
}

std::string encode_byte_value(const Bytes& b) {
    if (is_valid_utf8(b) && b.rfind("hex:", 0) != 0) return b;
    static const char* digits = "0123456789abcdef";
    std::string out = "hex:";
    out.reserve(4 + b.size() * 2);
    for (unsigned char c : b) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0x0F]);
    }
    return out;
}

Bytes decode_byte_value(const std::string& s) {
    if (s.rfind("hex:", 0) != 0) return s;
    const std::string_view hex = std::string_view(s).substr(4);
    if (hex.size() % 2 != 0) return s;  // not our encoding; take it literally
    Bytes out;
    out.reserve(hex.size() / 2);
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
        int hi = nibble(hex[i]);
        int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return s;  // not hex; take it literally
        out.push_back(static_cast<char>((hi << 4) | lo));
    }
    return out;
}

Json message_to_json(const LdapMessage& m) {
    Json doc = Json::object();
    doc["messageID"] = m.message_id;
    Json op = Json::object();
    op[std::string(op_name(m.op))] = std::visit(OpToJson{}, m.op);
    doc["protocolOp"] = std::move(op);
    if (m.controls) doc["controls"] = encode_byte_value(*m.controls);
    return doc;
}

LdapMessage json_to_message(const Json& doc) {
    ObjectReader r(doc, "document");
    LdapMessage m;
    m.message_id = r.require_int("messageID", 0, kMaxMessageId);
    const Json& op = r.require("protocolOp");
    if (!op.is_object() || op.size() != 1)
        throw SchemaError("protocolOp must hold exactly one operation");
    m.op = op_from_json(op.begin().key(), *op.begin());
    if (const Json* c = r.optional("controls")) m.controls = r.as_string(*c, "controls");
    r.no_extras();
    return m;
}

LdapMessage parse_document(std::string_view text) {
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw SchemaError("not valid JSON");
    return json_to_message(doc);
}

std::string dump_document(const Json& doc) { return doc.dump(); }

SplitResult split_json_stream(std::string_view text) {
    SplitResult out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r';
    };
    while (i < n) {
        // skip to the next candidate object start
        bool saw_junk = false;
        while (i < n && text[i] != '{') {
            if (!is_space(text[i])) saw_junk = true;
            ++i;
        }
        if (saw_junk) ++out.garbage_chunks;
        if (i >= n) break;

        // scan one balanced object, honoring strings and escapes
        std::size_t start = i;
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        std::size_t end = std::string_view::npos;
        for (std::size_t k = i; k < n; ++k) {
            char c = text[k];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}') {
                --depth;
                if (depth == 0) {
                    end = k + 1;
                    break;
                }
            }
        }
        if (end == std::string_view::npos) {
            out.remainder = std::string(text.substr(start));
            return out;
        }
        std::string_view chunk = text.substr(start, end - start);
        if (Json::accept(chunk)) {
            out.documents.emplace_back(chunk);
        } else {
            ++out.garbage_chunks;  // balanced braces but not JSON
        }
        i = end;
    }
    return out;
}

}  // namespace ldapot::jsonio
