// ber.cpp

#include "ldapot/ber.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

namespace ldapot::ber {

namespace {

using Buf = std::vector<std::uint8_t>;

constexpr std::uint8_t kSequence = 0x30;
constexpr std::uint8_t kSet = 0x31;
constexpr std::uint8_t kInteger = 0x02;
constexpr std::uint8_t kEnumerated = 0x0A;
constexpr std::uint8_t kOctetString = 0x04;
constexpr std::uint8_t kBoolean = 0x01;
constexpr int kMaxFilterDepth = 64;

constexpr std::uint8_t ctx_prim(int n) { return static_cast<std::uint8_t>(0x80 | n); }
constexpr std::uint8_t ctx_cons(int n) { return static_cast<std::uint8_t>(0xA0 | n); }
constexpr std::uint8_t app_prim(int n) { return static_cast<std::uint8_t>(0x40 | n); }
constexpr std::uint8_t app_cons(int n) { return static_cast<std::uint8_t>(0x60 | n); }

// ---------------------------------------------------------------- encoding --

void append(Buf& out, const Buf& b) { out.insert(out.end(), b.begin(), b.end()); }

void append_length(Buf& out, std::size_t n) {
    if (n < 0x80) {
        out.push_back(static_cast<std::uint8_t>(n));
        return;
    }
    std::uint8_t tmp[sizeof(std::size_t)];
    int k = 0;
    while (n != 0) {
        tmp[k++] = static_cast<std::uint8_t>(n & 0xFF);
        n >>= 8;
    }
    out.push_back(static_cast<std::uint8_t>(0x80 | k));
    while (k > 0) out.push_back(tmp[--k]);
}

Buf tlv(std::uint8_t tag, const Buf& content) {
    Buf out;
    out.reserve(content.size() + 4);
    out.push_back(tag);
    append_length(out, content.size());
    append(out, content);
    return out;
}

// Minimal two's-complement content octets.
Buf int_content(std::int64_t v) {
    std::uint64_t u = static_cast<std::uint64_t>(v);
    Buf b(8);
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(u >> (8 * (7 - i)));
    std::size_t k = 0;
    while (k + 1 < b.size()) {
        if (b[k] == 0x00 && (b[k + 1] & 0x80) == 0) { ++k; continue; }
        if (b[k] == 0xFF && (b[k + 1] & 0x80) != 0) { ++k; continue; }
        break;
    }
    return Buf(b.begin() + static_cast<std::ptrdiff_t>(k), b.end());
}

Buf make_int(std::int64_t v) { return tlv(kInteger, int_content(v)); }
Buf make_enum(std::int64_t v) { return tlv(kEnumerated, int_content(v)); }

Buf make_octets(std::string_view s) {
    Buf content(s.begin(), s.end());
    return tlv(kOctetString, content);
}

Buf make_bool(bool b) { return tlv(kBoolean, Buf{b ? std::uint8_t{0xFF} : std::uint8_t{0x00}}); }

void check_non_negative(std::int64_t v, const char* what) {
    if (v < 0) throw EncodeError(std::string(what) + " must be non-negative");
}

Buf encode_filter(const Filter& f, int depth) {
    if (depth > kMaxFilterDepth) throw EncodeError("filter nesting too deep");
    switch (f.kind) {
        case Filter::Kind::And:
        case Filter::Kind::Or: {
            if (f.children.empty())
                throw EncodeError("and/or filter needs at least one child");
            Buf content;
            for (const Filter& c : f.children) append(content, encode_filter(c, depth + 1));
            return tlv(ctx_cons(f.kind == Filter::Kind::And ? filter_tag::and_filter
                                                            : filter_tag::or_filter),
                       content);
        }
        case Filter::Kind::Not: {
            if (f.children.size() != 1)
                throw EncodeError("not filter needs exactly one child");
            return tlv(ctx_cons(filter_tag::not_filter), encode_filter(f.children[0], depth + 1));
        }
        case Filter::Kind::Equality:
        case Filter::Kind::GreaterOrEqual:
        case Filter::Kind::LessOrEqual:
        case Filter::Kind::Approx: {
            Buf content = make_octets(f.attribute);
            append(content, make_octets(f.value));
            int n = filter_tag::equality_match;
            if (f.kind == Filter::Kind::GreaterOrEqual) n = filter_tag::greater_or_equal;
            if (f.kind == Filter::Kind::LessOrEqual) n = filter_tag::less_or_equal;
            if (f.kind == Filter::Kind::Approx) n = filter_tag::approx_match;
            return tlv(ctx_cons(n), content);
        }
        case Filter::Kind::Substrings: {
            Buf inner;
            if (f.initial) append(inner, tlv(ctx_prim(0), Buf(f.initial->begin(), f.initial->end())));
            for (const Bytes& a : f.any) append(inner, tlv(ctx_prim(1), Buf(a.begin(), a.end())));
            if (f.final_part)
                append(inner, tlv(ctx_prim(2), Buf(f.final_part->begin(), f.final_part->end())));
            if (inner.empty())
                throw EncodeError("substrings filter needs at least one component");
            Buf content = make_octets(f.attribute);
            append(content, tlv(kSequence, inner));
            return tlv(ctx_cons(filter_tag::substrings), content);
        }
        case Filter::Kind::Present:
            return tlv(ctx_prim(filter_tag::present), Buf(f.attribute.begin(), f.attribute.end()));
    }
    throw EncodeError("unknown filter kind");
}

Buf encode_result_fields(const LdapResult& r) {
    check_non_negative(r.result_code, "resultCode");
    Buf content = make_enum(r.result_code);
    append(content, make_octets(r.matched_dn));
    append(content, make_octets(r.diagnostic_message));
    if (r.referral) {
        Buf uris;
        for (const std::string& u : *r.referral) append(uris, make_octets(u));
        append(content, tlv(ctx_cons(3), uris));
    }
    return content;
}

Buf encode_partial_attribute(const PartialAttribute& a) {
    Buf vals;
    for (const Bytes& v : a.vals) append(vals, make_octets(v));
    Buf content = make_octets(a.type);
    append(content, tlv(kSet, vals));
    return tlv(kSequence, content);
}

struct OpEncoder {
    Buf operator()(const BindRequest& o) const {
        check_non_negative(o.version, "bind version");
        Buf content = make_int(o.version);
        append(content, make_octets(o.name));
        append(content, tlv(ctx_prim(0), Buf(o.simple_credentials.begin(),
                                             o.simple_credentials.end())));
        return tlv(app_cons(app_tag::bind_request), content);
    }
    Buf operator()(const BindResponse& o) const {
        Buf content = encode_result_fields(o.result);
        if (o.server_sasl_creds)
            append(content, tlv(ctx_prim(7), Buf(o.server_sasl_creds->begin(),
                                                 o.server_sasl_creds->end())));
        return tlv(app_cons(app_tag::bind_response), content);
    }
    Buf operator()(const UnbindRequest&) const {
        return tlv(app_prim(app_tag::unbind_request), {});
    }
    Buf operator()(const SearchRequest& o) const {
        if (o.scope < 0 || o.scope > 2) throw EncodeError("search scope out of range");
        if (o.deref_aliases < 0 || o.deref_aliases > 3)
            throw EncodeError("derefAliases out of range");
        check_non_negative(o.size_limit, "sizeLimit");
        check_non_negative(o.time_limit, "timeLimit");
        Buf content = make_octets(o.base_object);
        append(content, make_enum(o.scope));
        append(content, make_enum(o.deref_aliases));
        append(content, make_int(o.size_limit));
        append(content, make_int(o.time_limit));
        append(content, make_bool(o.types_only));
        append(content, encode_filter(o.filter, 0));
        Buf attrs;
        for (const std::string& a : o.attributes) append(attrs, make_octets(a));
        append(content, tlv(kSequence, attrs));
        return tlv(app_cons(app_tag::search_request), content);
    }
    Buf operator()(const SearchResultEntry& o) const {
        Buf attrs;
        for (const PartialAttribute& a : o.attributes) append(attrs, encode_partial_attribute(a));
        Buf content = make_octets(o.object_name);
        append(content, tlv(kSequence, attrs));
        return tlv(app_cons(app_tag::search_res_entry), content);
    }
    Buf operator()(const SearchResultDone& o) const {
        return tlv(app_cons(app_tag::search_res_done), encode_result_fields(o.result));
    }
    Buf operator()(const SearchResultReference& o) const {
        if (o.uris.empty()) throw EncodeError("searchResRef needs at least one URI");
        Buf content;
        for (const std::string& u : o.uris) append(content, make_octets(u));
        return tlv(app_cons(app_tag::search_res_ref), content);
    }
    Buf operator()(const ModifyRequest& o) const {
        Buf changes;
        for (const ModifyChange& c : o.changes) {
            if (c.operation < 0 || c.operation > 2)
                throw EncodeError("modify operation out of range");
            Buf change = make_enum(c.operation);
            append(change, encode_partial_attribute(c.modification));
            append(changes, tlv(kSequence, change));
        }
        Buf content = make_octets(o.object);
        append(content, tlv(kSequence, changes));
        return tlv(app_cons(app_tag::modify_request), content);
    }
    Buf operator()(const ModifyResponse& o) const {
        return tlv(app_cons(app_tag::modify_response), encode_result_fields(o.result));
    }
    Buf operator()(const AddRequest& o) const {
        Buf attrs;
        for (const PartialAttribute& a : o.attributes) append(attrs, encode_partial_attribute(a));
        Buf content = make_octets(o.entry);
        append(content, tlv(kSequence, attrs));
        return tlv(app_cons(app_tag::add_request), content);
    }
    Buf operator()(const AddResponse& o) const {
        return tlv(app_cons(app_tag::add_response), encode_result_fields(o.result));
    }
    Buf operator()(const DelRequest& o) const {
        return tlv(app_prim(app_tag::del_request), Buf(o.dn.begin(), o.dn.end()));
    }
    Buf operator()(const DelResponse& o) const {
        return tlv(app_cons(app_tag::del_response), encode_result_fields(o.result));
    }
    Buf operator()(const ModifyDnRequest& o) const {
        Buf content = make_octets(o.entry);
        append(content, make_octets(o.new_rdn));
        append(content, make_bool(o.delete_old_rdn));
        if (o.new_superior)
            append(content, tlv(ctx_prim(0), Buf(o.new_superior->begin(), o.new_superior->end())));
        return tlv(app_cons(app_tag::mod_dn_request), content);
    }
    Buf operator()(const ModifyDnResponse& o) const {
        return tlv(app_cons(app_tag::mod_dn_response), encode_result_fields(o.result));
    }
    Buf operator()(const CompareRequest& o) const {
        Buf ava = make_octets(o.attribute_desc);
        append(ava, make_octets(o.assertion_value));
        Buf content = make_octets(o.entry);
        append(content, tlv(kSequence, ava));
        return tlv(app_cons(app_tag::compare_request), content);
    }
    Buf operator()(const CompareResponse& o) const {
        return tlv(app_cons(app_tag::compare_response), encode_result_fields(o.result));
    }
    Buf operator()(const AbandonRequest& o) const {
        if (o.id_to_abandon < 0 || o.id_to_abandon > kMaxMessageId)
            throw EncodeError("abandoned messageID out of range");
        return tlv(app_prim(app_tag::abandon_request), int_content(o.id_to_abandon));
    }
    Buf operator()(const ExtendedRequest& o) const {
        Buf content = tlv(ctx_prim(0), Buf(o.request_name.begin(), o.request_name.end()));
        if (o.request_value)
            append(content, tlv(ctx_prim(1), Buf(o.request_value->begin(), o.request_value->end())));
        return tlv(app_cons(app_tag::extended_req), content);
    }
    Buf operator()(const ExtendedResponse& o) const {
        Buf content = encode_result_fields(o.result);
        if (o.response_name)
            append(content, tlv(ctx_prim(10), Buf(o.response_name->begin(), o.response_name->end())));
        if (o.response_value)
            append(content,
                   tlv(ctx_prim(11), Buf(o.response_value->begin(), o.response_value->end())));
        return tlv(app_cons(app_tag::extended_resp), content);
    }
};

// ---------------------------------------------------------------- decoding --

struct MalformedError {
    std::string what;
};

struct UnsupportedError {
    std::string what;
    std::optional<int> tag;
};

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    bool at_end() const { return pos_ == data_.size(); }

    std::uint8_t peek_tag() const {
        if (at_end()) throw MalformedError{"truncated element"};
        return data_[pos_];
    }

    struct Element {
        std::uint8_t tag = 0;
        std::span<const std::uint8_t> content;
        std::span<const std::uint8_t> raw;  // tag + length + content
    };

    Element next() {
        const std::size_t start = pos_;
        if (at_end()) throw MalformedError{"truncated element"};
        std::uint8_t tag = data_[pos_++];
        if ((tag & 0x1F) == 0x1F) throw MalformedError{"high tag numbers not supported"};
        if (pos_ >= data_.size()) throw MalformedError{"truncated length"};
        std::uint8_t first = data_[pos_++];
        std::uint64_t len = 0;
        if (first < 0x80) {
            len = first;
        } else if (first == 0x80) {
            throw MalformedError{"indefinite lengths not supported"};
        } else {
            int n = first & 0x7F;
            if (n > 8) throw MalformedError{"length too long"};
            if (data_.size() - pos_ < static_cast<std::size_t>(n))
                throw MalformedError{"truncated length"};
            for (int i = 0; i < n; ++i) len = (len << 8) | data_[pos_++];
        }
        if (len > data_.size() - pos_) throw MalformedError{"element overruns enclosing frame"};
        Element e;
        e.tag = tag;
        e.content = data_.subspan(pos_, static_cast<std::size_t>(len));
        pos_ += static_cast<std::size_t>(len);
        e.raw = data_.subspan(start, pos_ - start);
        return e;
    }

    Element expect(std::uint8_t tag, const char* what) {
        Element e = next();
        if (e.tag != tag)
            throw MalformedError{std::string("expected ") + what};
        return e;
    }

    void require_end(const char* where) const {
        if (!at_end()) throw MalformedError{std::string("trailing bytes in ") + where};
    }

  private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::int64_t parse_int_content(std::span<const std::uint8_t> c, const char* what) {
    if (c.empty()) throw MalformedError{std::string(what) + ": empty integer"};
    // drop redundant sign-extension octets, then require it fits 64 bits
    std::size_t k = 0;
    while (k + 1 < c.size()) {
        if (c[k] == 0x00 && (c[k + 1] & 0x80) == 0) { ++k; continue; }
        if (c[k] == 0xFF && (c[k + 1] & 0x80) != 0) { ++k; continue; }
        break;
    }
    c = c.subspan(k);
    if (c.size() > 8) throw MalformedError{std::string(what) + ": integer out of range"};
    std::int64_t v = (c[0] & 0x80) ? -1 : 0;
    for (std::uint8_t b : c) v = (v << 8) | b;
    return v;
}

std::int32_t parse_int32(std::span<const std::uint8_t> c, std::int64_t lo, std::int64_t hi,
                         const char* what) {
    std::int64_t v = parse_int_content(c, what);
    if (v < lo || v > hi) throw MalformedError{std::string(what) + ": value out of range"};
    return static_cast<std::int32_t>(v);
}

std::string to_str(std::span<const std::uint8_t> c) {
    return std::string(reinterpret_cast<const char*>(c.data()), c.size());
}

bool parse_bool(Reader::Element e, const char* what) {
    if (e.tag != kBoolean || e.content.size() != 1)
        throw MalformedError{std::string(what) + ": expected BOOLEAN"};
    return e.content[0] != 0;
}

Filter parse_filter(const Reader::Element& e, int depth) {
    if (depth > kMaxFilterDepth) throw MalformedError{"filter nesting too deep"};
    if ((e.tag & 0xC0) != 0x80) throw MalformedError{"filter must use context tags"};
    const bool constructed = (e.tag & 0x20) != 0;
    const int num = e.tag & 0x1F;
    switch (num) {
        case filter_tag::and_filter:
        case filter_tag::or_filter: {
            if (!constructed) throw MalformedError{"and/or filter must be constructed"};
            std::vector<Filter> children;
            Reader r(e.content);
            while (!r.at_end()) children.push_back(parse_filter(r.next(), depth + 1));
            if (children.empty()) throw MalformedError{"and/or filter needs at least one child"};
            Filter f;
            f.kind = num == filter_tag::and_filter ? Filter::Kind::And : Filter::Kind::Or;
            f.children = std::move(children);
            return f;
        }
        case filter_tag::not_filter: {
            if (!constructed) throw MalformedError{"not filter must be constructed"};
            Reader r(e.content);
            Filter inner = parse_filter(r.next(), depth + 1);
            r.require_end("not filter");
            return Filter::not_of(std::move(inner));
        }
        case filter_tag::equality_match:
        case filter_tag::greater_or_equal:
        case filter_tag::less_or_equal:
        case filter_tag::approx_match: {
            if (!constructed) throw MalformedError{"attribute assertion must be constructed"};
            Reader r(e.content);
            std::string attr = to_str(r.expect(kOctetString, "assertion attribute").content);
            Bytes value = to_str(r.expect(kOctetString, "assertion value").content);
            r.require_end("attribute assertion");
            Filter f;
            if (num == filter_tag::equality_match) f.kind = Filter::Kind::Equality;
            else if (num == filter_tag::greater_or_equal) f.kind = Filter::Kind::GreaterOrEqual;
            else if (num == filter_tag::less_or_equal) f.kind = Filter::Kind::LessOrEqual;
            else f.kind = Filter::Kind::Approx;
            f.attribute = std::move(attr);
            f.value = std::move(value);
            return f;
        }
        case filter_tag::substrings: {
            if (!constructed) throw MalformedError{"substrings filter must be constructed"};
            Reader r(e.content);
            Filter f;
            f.kind = Filter::Kind::Substrings;
            f.attribute = to_str(r.expect(kOctetString, "substrings attribute").content);
            Reader s(r.expect(kSequence, "substrings sequence").content);
            r.require_end("substrings filter");
            int seen = 0;     // 0 none, 1 initial, 2 any, 3 final
            int count = 0;
            while (!s.at_end()) {
                Reader::Element part = s.next();
                ++count;
                switch (part.tag) {
                    case 0x80:
                        if (seen >= 1) throw MalformedError{"substrings initial out of order"};
                        f.initial = to_str(part.content);
                        seen = 1;
                        break;
                    case 0x81:
                        if (seen >= 3) throw MalformedError{"substrings any after final"};
                        f.any.push_back(to_str(part.content));
                        seen = 2;
                        break;
                    case 0x82:
                        if (seen >= 3) throw MalformedError{"duplicate substrings final"};
                        f.final_part = to_str(part.content);
                        seen = 3;
                        break;
                    default:
                        throw MalformedError{"unknown substrings component"};
                }
            }
            if (count == 0) throw MalformedError{"substrings filter needs at least one component"};
            return f;
        }
        case filter_tag::present: {
            if (constructed) throw MalformedError{"present filter must be primitive"};
            return Filter::present(to_str(e.content));
        }
        case 9:
            throw MalformedError{"extensibleMatch filters not supported"};
        default:
            throw MalformedError{"unknown filter tag"};
    }
}

LdapResult parse_result_fields(Reader& r) {
    LdapResult result;
    Reader::Element code = r.next();
    if (code.tag != kEnumerated) throw MalformedError{"resultCode must be ENUMERATED"};
    result.result_code = parse_int32(code.content, 0, kMaxMessageId, "resultCode");
    result.matched_dn = to_str(r.expect(kOctetString, "matchedDN").content);
    result.diagnostic_message = to_str(r.expect(kOctetString, "diagnosticMessage").content);
    if (!r.at_end() && r.peek_tag() == ctx_cons(3)) {
        Reader uris(r.next().content);
        std::vector<std::string> referral;
        while (!uris.at_end())
            referral.push_back(to_str(uris.expect(kOctetString, "referral URI").content));
        result.referral = std::move(referral);
    }
    return result;
}

PartialAttribute parse_partial_attribute(const Reader::Element& e, const char* what) {
    if (e.tag != kSequence) throw MalformedError{std::string(what) + ": expected SEQUENCE"};
    Reader r(e.content);
    PartialAttribute a;
    a.type = to_str(r.expect(kOctetString, "attribute type").content);
    Reader vals(r.expect(kSet, "attribute value set").content);
    r.require_end(what);
    while (!vals.at_end())
        a.vals.push_back(to_str(vals.expect(kOctetString, "attribute value").content));
    return a;
}

ProtocolOp parse_op(const Reader::Element& op) {
    const int num = op.tag & 0x1F;
    const bool constructed = (op.tag & 0x20) != 0;
    auto need_constructed = [&](const char* what) {
        if (!constructed) throw MalformedError{std::string(what) + " must be constructed"};
    };
    auto need_primitive = [&](const char* what) {
        if (constructed) throw MalformedError{std::string(what) + " must be primitive"};
    };
    Reader r(op.content);
    switch (num) {
        case app_tag::bind_request: {
            need_constructed("bindRequest");
            BindRequest o;
            o.version = parse_int32(r.expect(kInteger, "bind version").content, 0, kMaxMessageId,
                                    "bind version");
            o.name = to_str(r.expect(kOctetString, "bind name").content);
            Reader::Element auth = r.next();
            if ((auth.tag & 0xC0) != 0x80)
                throw MalformedError{"bind authentication must use a context tag"};
            if (auth.tag != ctx_prim(0))
                throw UnsupportedError{"authentication method not supported",
                                       app_tag::bind_request};
            o.simple_credentials = to_str(auth.content);
            r.require_end("bindRequest");
            return o;
        }
        case app_tag::bind_response: {
            need_constructed("bindResponse");
            BindResponse o;
            o.result = parse_result_fields(r);
            if (!r.at_end() && r.peek_tag() == ctx_prim(7))
                o.server_sasl_creds = to_str(r.next().content);
            r.require_end("bindResponse");
            return o;
        }
        case app_tag::unbind_request: {
            need_primitive("unbindRequest");
            if (!op.content.empty()) throw MalformedError{"unbindRequest must be empty"};
            return UnbindRequest{};
        }
        case app_tag::search_request: {
            need_constructed("searchRequest");
            SearchRequest o;
            o.base_object = to_str(r.expect(kOctetString, "baseObject").content);
            o.scope = parse_int32(r.expect(kEnumerated, "scope").content, 0, 2, "scope");
            o.deref_aliases =
                parse_int32(r.expect(kEnumerated, "derefAliases").content, 0, 3, "derefAliases");
            o.size_limit = parse_int32(r.expect(kInteger, "sizeLimit").content, 0, kMaxMessageId,
                                       "sizeLimit");
            o.time_limit = parse_int32(r.expect(kInteger, "timeLimit").content, 0, kMaxMessageId,
                                       "timeLimit");
            o.types_only = parse_bool(r.next(), "typesOnly");
            o.filter = parse_filter(r.next(), 0);
            Reader attrs(r.expect(kSequence, "attribute selection").content);
            r.require_end("searchRequest");
            while (!attrs.at_end())
                o.attributes.push_back(to_str(attrs.expect(kOctetString, "attribute").content));
            return o;
        }
        case app_tag::search_res_entry: {
            need_constructed("searchResEntry");
            SearchResultEntry o;
            o.object_name = to_str(r.expect(kOctetString, "objectName").content);
            Reader attrs(r.expect(kSequence, "attribute list").content);
            r.require_end("searchResEntry");
            while (!attrs.at_end())
                o.attributes.push_back(parse_partial_attribute(attrs.next(), "partial attribute"));
            return o;
        }
        case app_tag::search_res_done: {
            need_constructed("searchResDone");
            SearchResultDone o;
            o.result = parse_result_fields(r);
            r.require_end("searchResDone");
            return o;
        }
        case app_tag::search_res_ref: {
            need_constructed("searchResRef");
            SearchResultReference o;
            while (!r.at_end())
                o.uris.push_back(to_str(r.expect(kOctetString, "reference URI").content));
            if (o.uris.empty()) throw MalformedError{"searchResRef needs at least one URI"};
            return o;
        }
        case app_tag::modify_request: {
            need_constructed("modifyRequest");
            ModifyRequest o;
            o.object = to_str(r.expect(kOctetString, "modify object").content);
            Reader changes(r.expect(kSequence, "change list").content);
            r.require_end("modifyRequest");
            while (!changes.at_end()) {
                Reader c(changes.expect(kSequence, "change").content);
                ModifyChange ch;
                ch.operation = parse_int32(c.expect(kEnumerated, "change operation").content, 0, 2,
                                           "change operation");
                ch.modification = parse_partial_attribute(c.next(), "modification");
                c.require_end("change");
                o.changes.push_back(std::move(ch));
            }
            return o;
        }
        case app_tag::modify_response: {
            need_constructed("modifyResponse");
            ModifyResponse o;
            o.result = parse_result_fields(r);
            r.require_end("modifyResponse");
            return o;
        }
        case app_tag::add_request: {
            need_constructed("addRequest");
            AddRequest o;
            o.entry = to_str(r.expect(kOctetString, "add entry").content);
            Reader attrs(r.expect(kSequence, "attribute list").content);
            r.require_end("addRequest");
            while (!attrs.at_end())
                o.attributes.push_back(parse_partial_attribute(attrs.next(), "add attribute"));
            return o;
        }
        case app_tag::add_response: {
            need_constructed("addResponse");
            AddResponse o;
            o.result = parse_result_fields(r);
            r.require_end("addResponse");
            return o;
        }
        case app_tag::del_request: {
            need_primitive("delRequest");
            return DelRequest{to_str(op.content)};
        }
        case app_tag::del_response: {
            need_constructed("delResponse");
            DelResponse o;
            o.result = parse_result_fields(r);
            r.require_end("delResponse");
            return o;
        }
        case app_tag::mod_dn_request: {
            need_constructed("modDNRequest");
            ModifyDnRequest o;
            o.entry = to_str(r.expect(kOctetString, "modDN entry").content);
            o.new_rdn = to_str(r.expect(kOctetString, "newrdn").content);
            o.delete_old_rdn = parse_bool(r.next(), "deleteoldrdn");
            if (!r.at_end() && r.peek_tag() == ctx_prim(0))
                o.new_superior = to_str(r.next().content);
            r.require_end("modDNRequest");
            return o;
        }
        case app_tag::mod_dn_response: {
            need_constructed("modDNResponse");
            ModifyDnResponse o;
            o.result = parse_result_fields(r);
            r.require_end("modDNResponse");
            return o;
        }
        case app_tag::compare_request: {
            need_constructed("compareRequest");
            CompareRequest o;
            o.entry = to_str(r.expect(kOctetString, "compare entry").content);
            Reader ava(r.expect(kSequence, "attribute value assertion").content);
            r.require_end("compareRequest");
            o.attribute_desc = to_str(ava.expect(kOctetString, "assertion attribute").content);
            o.assertion_value = to_str(ava.expect(kOctetString, "assertion value").content);
            ava.require_end("attribute value assertion");
            return o;
        }
        case app_tag::compare_response: {
            need_constructed("compareResponse");
            CompareResponse o;
            o.result = parse_result_fields(r);
            r.require_end("compareResponse");
            return o;
        }
        case app_tag::abandon_request: {
            need_primitive("abandonRequest");
            AbandonRequest o;
            o.id_to_abandon =
                parse_int32(op.content, 0, kMaxMessageId, "abandoned messageID");
            return o;
        }
        case app_tag::extended_req: {
            need_constructed("extendedReq");
            ExtendedRequest o;
            Reader::Element name = r.next();
            if (name.tag != ctx_prim(0)) throw MalformedError{"extendedReq requestName expected"};
            o.request_name = to_str(name.content);
            if (!r.at_end() && r.peek_tag() == ctx_prim(1))
                o.request_value = to_str(r.next().content);
            r.require_end("extendedReq");
            return o;
        }
        case app_tag::extended_resp: {
            need_constructed("extendedResp");
            ExtendedResponse o;
            o.result = parse_result_fields(r);
            if (!r.at_end() && r.peek_tag() == ctx_prim(10))
                o.response_name = to_str(r.next().content);
            if (!r.at_end() && r.peek_tag() == ctx_prim(11))
                o.response_value = to_str(r.next().content);
            r.require_end("extendedResp");
            return o;
        }
        default:
            throw UnsupportedError{"unmodeled operation tag", num};
    }
}

}  // namespace

std::string_view to_string(DecodeStatus s) {
    switch (s) {
        case DecodeStatus::Ok: return "ok";
        case DecodeStatus::IncompleteFrame: return "incomplete frame";
        case DecodeStatus::MalformedBer: return "malformed";
        case DecodeStatus::UnsupportedOp: return "unsupported operation";
    }
    return "unknown";
}

PeekResult peek_frame_length(std::span<const std::uint8_t> buffer) {
    if (buffer.empty()) return {DecodeStatus::IncompleteFrame, 0};
    if (buffer[0] != kSequence) return {DecodeStatus::MalformedBer, 0};
    if (buffer.size() < 2) return {DecodeStatus::IncompleteFrame, 0};
    const std::uint8_t first = buffer[1];
    if (first < 0x80) return {DecodeStatus::Ok, std::size_t{2} + first};
    if (first == 0x80) return {DecodeStatus::MalformedBer, 0};  // indefinite
    const int n = first & 0x7F;
    if (n > 8) return {DecodeStatus::MalformedBer, 0};
    if (buffer.size() < std::size_t{2} + static_cast<std::size_t>(n))
        return {DecodeStatus::IncompleteFrame, 0};
    std::uint64_t len = 0;
    for (int i = 0; i < n; ++i) len = (len << 8) | buffer[2 + static_cast<std::size_t>(i)];
    if (len > std::numeric_limits<std::size_t>::max() - 2 - static_cast<std::size_t>(n))
        return {DecodeStatus::MalformedBer, 0};
    return {DecodeStatus::Ok, 2 + static_cast<std::size_t>(n) + static_cast<std::size_t>(len)};
}

DecodeResult decode_message(std::span<const std::uint8_t> buffer) {
    DecodeResult res;
    PeekResult pk = peek_frame_length(buffer);
    if (pk.status == DecodeStatus::IncompleteFrame) {
        res.status = DecodeStatus::IncompleteFrame;
        return res;
    }
    if (pk.status == DecodeStatus::MalformedBer) {
        res.status = DecodeStatus::MalformedBer;
        res.error = "bad outer tag or length";
        return res;
    }
    if (buffer.size() < pk.frame_length) {
        res.status = DecodeStatus::IncompleteFrame;
        return res;
    }
    res.consumed = pk.frame_length;
    try {
        Reader outer(buffer.first(pk.frame_length));
        Reader r(outer.next().content);
        res.message_id = parse_int32(r.expect(kInteger, "messageID").content, 0, kMaxMessageId,
                                     "messageID");
        Reader::Element op = r.next();
        if ((op.tag & 0xC0) != 0x40)
            throw MalformedError{"protocolOp must use an application tag"};
        if ((op.tag & 0x1F) == 0x1F)
            throw UnsupportedError{"unmodeled operation tag", std::nullopt};
        res.app_tag = op.tag & 0x1F;
        LdapMessage m;
        m.message_id = *res.message_id;
        m.op = parse_op(op);
        if (!r.at_end()) {
            if (r.peek_tag() != ctx_cons(0)) throw MalformedError{"expected controls"};
            Reader::Element controls = r.next();
            m.controls = to_str(controls.raw);
            r.require_end("message");
        }
        res.message = std::move(m);
        res.status = DecodeStatus::Ok;
    } catch (const MalformedError& e) {
        res.status = DecodeStatus::MalformedBer;
        res.error = e.what;
    } catch (const UnsupportedError& e) {
        res.status = DecodeStatus::UnsupportedOp;
        if (e.tag) res.app_tag = e.tag;
        res.error = e.what;
    }
    return res;
}

std::vector<std::uint8_t> encode_message(const LdapMessage& m) {
    if (m.message_id < 0 || m.message_id > kMaxMessageId)
        throw EncodeError("messageID out of range");
    Buf content = make_int(m.message_id);
    append(content, std::visit(OpEncoder{}, m.op));
    if (m.controls) {
        // opaque [0] Controls element, re-emitted verbatim; sanity-check the
        // outer tag and length so we never build an unparseable frame
        Buf raw(m.controls->begin(), m.controls->end());
        try {
            Reader check(std::span<const std::uint8_t>(raw.data(), raw.size()));
            Reader::Element e = check.next();
            if (e.tag != ctx_cons(0) || !check.at_end())
                throw MalformedError{"not a single element"};
        } catch (const MalformedError&) {
            throw EncodeError("controls must be a single well-formed [0] element");
        }
        append(content, raw);
    }
    return tlv(kSequence, content);
}

}  // namespace ldapot::ber
