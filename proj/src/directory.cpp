// directory.cpp

#include "ldapot/directory.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ldapot {

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool ci_equal(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return std::string(s.substr(b, e - b));
}

std::string decode_base64(std::string_view in, bool& ok) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::string out;
    int buffer = 0, bits = 0;
    ok = true;
    for (char c : in) {
        if (c == '=' || c == '\r' || c == '\n' || c == ' ') continue;
        int v = value(c);
        if (v < 0) {
            ok = false;
            return {};
        }
        buffer = (buffer << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
        }
    }
    return out;
}

}  // namespace

// ------------------------------------------------------------ DN handling --

std::vector<std::string> split_dn(std::string_view dn) {
    std::vector<std::string> parts;
    std::string current;
    bool escaped = false;
    for (char c : dn) {
        if (escaped) {
            current.push_back(c);
            escaped = false;
        } else if (c == '\\') {
            current.push_back(c);
            escaped = true;
        } else if (c == ',') {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty() || !parts.empty()) parts.push_back(trim(current));
    // an all-whitespace dn collapses to nothing
    if (parts.size() == 1 && parts[0].empty()) parts.clear();
    return parts;
}

std::string normalize_dn(std::string_view dn) {
    std::string out;
    for (const std::string& part : split_dn(dn)) {
        if (!out.empty()) out.push_back(',');
        out += to_lower(part);
    }
    return out;
}

std::string parent_dn(std::string_view dn) {
    auto parts = split_dn(dn);
    if (parts.size() <= 1) return "";
    std::string out;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        if (!out.empty()) out.push_back(',');
        out += parts[i];
    }
    return out;
}

// ----------------------------------------------------------------- entries --

const DirectoryAttribute* DirectoryEntry::find_attribute(std::string_view name) const {
    for (const DirectoryAttribute& a : attributes)
        if (ci_equal(a.name, name)) return &a;
    return nullptr;
}

DirectoryAttribute* DirectoryEntry::find_attribute(std::string_view name) {
    for (DirectoryAttribute& a : attributes)
        if (ci_equal(a.name, name)) return &a;
    return nullptr;
}

DirectoryAttribute& DirectoryEntry::get_or_add_attribute(std::string_view name) {
    for (DirectoryAttribute& a : attributes)
        if (ci_equal(a.name, name)) return a;
    attributes.push_back(DirectoryAttribute{std::string(name), {}});
    return attributes.back();
}

const DirectoryEntry* Directory::find(std::string_view dn) const {
    const std::string key = normalize_dn(dn);
    for (const DirectoryEntry& e : entries_)
        if (normalize_dn(e.dn) == key) return &e;
    return nullptr;
}

DirectoryEntry* Directory::find(std::string_view dn) {
    const std::string key = normalize_dn(dn);
    for (DirectoryEntry& e : entries_)
        if (normalize_dn(e.dn) == key) return &e;
    return nullptr;
}

bool Directory::has_children(std::string_view dn) const {
    const std::string key = normalize_dn(dn);
    for (const DirectoryEntry& e : entries_)
        if (normalize_dn(parent_dn(e.dn)) == key) return true;
    return false;
}

void Directory::add_entry(DirectoryEntry entry) {
    if (split_dn(entry.dn).empty()) throw DirectoryError("entry has an empty dn");
    if (find(entry.dn) != nullptr) throw DirectoryError("duplicate dn: " + entry.dn);
    if (entries_.empty()) {
        suffix_ = entry.dn;
    } else {
        const std::string parent = parent_dn(entry.dn);
        if (parent.empty() || find(parent) == nullptr) throw OrphanEntryError(entry.dn);
    }
    entries_.push_back(std::move(entry));
}

bool Directory::remove_entry(std::string_view dn) {
    if (has_children(dn)) throw DirectoryError("entry has children: " + std::string(dn));
    const std::string key = normalize_dn(dn);
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (normalize_dn(it->dn) == key) {
            entries_.erase(it);
            return true;
        }
    }
    return false;
}

// -------------------------------------------------------------------- LDIF --

Directory load_directory(std::istream& in) {
    Directory dir;
    std::vector<std::pair<std::size_t, std::string>> logical;  // (line no, unfolded line)
    std::string line;
    std::size_t lineno = 0;
    std::size_t record_start = 0;

    auto flush_record = [&]() {
        if (logical.empty()) return;
        DirectoryEntry entry;
        bool have_dn = false;
        for (const auto& [ln, text] : logical) {
            std::size_t colon = text.find(':');
            if (colon == std::string::npos)
                throw LdifSyntaxError(ln, "expected \"attribute: value\"");
            std::string name = trim(text.substr(0, colon));
            if (name.empty()) throw LdifSyntaxError(ln, "empty attribute name");
            std::string value;
            if (colon + 1 < text.size() && text[colon + 1] == ':') {
                bool ok = false;
                value = decode_base64(trim(text.substr(colon + 2)), ok);
                if (!ok) throw LdifSyntaxError(ln, "invalid base64 value");
            } else {
                value = trim(text.substr(colon + 1));
            }
            if (ci_equal(name, "dn")) {
                if (have_dn) throw LdifSyntaxError(ln, "second dn in record");
                entry.dn = value;
                have_dn = true;
                continue;
            }
            if (!have_dn) throw LdifSyntaxError(ln, "record must start with dn:");
            entry.get_or_add_attribute(name).values.push_back(value);
        }
        if (!have_dn) throw LdifSyntaxError(record_start, "record must start with dn:");
        try {
            dir.add_entry(std::move(entry));
        } catch (const OrphanEntryError&) {
            throw;
        } catch (const DirectoryError& e) {
            throw LdifSyntaxError(record_start, e.what());
        }
        logical.clear();
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush_record();
            continue;
        }
        if (line[0] == '#') continue;
        if (line[0] == ' ') {  // continuation of the previous logical line
            if (logical.empty()) throw LdifSyntaxError(lineno, "continuation without a line");
            logical.back().second += line.substr(1);
            continue;
        }
        // a conventional leading "version: 1" header is tolerated
        if (logical.empty() && dir.size() == 0 && line.rfind("version:", 0) == 0) continue;
        if (logical.empty()) record_start = lineno;
        logical.emplace_back(lineno, line);
    }
    flush_record();
    if (dir.size() == 0) throw LdifSyntaxError(lineno, "no records in input");
    return dir;
}

Directory load_directory_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DirectoryError("cannot open ldif file: " + path);
    try {
        return load_directory(in);
    } catch (const LdifSyntaxError& e) {
        throw LdifSyntaxError(e.line(), path + ": " + e.what());
    }
}

// ------------------------------------------------------------------ filter --

namespace {

bool numeric(std::string_view s, long long& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// -1 below, 0 equal, 1 above; numeric when both sides parse as integers
int order_compare(std::string_view value, std::string_view assertion) {
    long long a = 0, b = 0;
    if (numeric(value, a) && numeric(assertion, b)) return a < b ? -1 : (a == b ? 0 : 1);
    const std::string va = to_lower(value);
    const std::string vb = to_lower(assertion);
    return va < vb ? -1 : (va == vb ? 0 : 1);
}

bool substrings_match(std::string_view value, const Filter& f) {
    const std::string v = to_lower(value);
    std::size_t pos = 0;
    if (f.initial) {
        const std::string part = to_lower(*f.initial);
        if (v.size() < part.size() || v.compare(0, part.size(), part) != 0) return false;
        pos = part.size();
    }
    for (const Bytes& raw : f.any) {
        const std::string part = to_lower(raw);
        const std::size_t at = v.find(part, pos);
        if (at == std::string::npos) return false;
        pos = at + part.size();
    }
    if (f.final_part) {
        const std::string part = to_lower(*f.final_part);
        if (v.size() < pos + part.size()) return false;
        if (v.compare(v.size() - part.size(), part.size(), part) != 0) return false;
    }
    return true;
}

}  // namespace

bool eval_filter(const DirectoryEntry& entry, const Filter& filter) {
    switch (filter.kind) {
        case Filter::Kind::And:
            return std::all_of(filter.children.begin(), filter.children.end(),
                               [&](const Filter& c) { return eval_filter(entry, c); });
        case Filter::Kind::Or:
            return std::any_of(filter.children.begin(), filter.children.end(),
                               [&](const Filter& c) { return eval_filter(entry, c); });
        case Filter::Kind::Not:
            return !eval_filter(entry, filter.children.at(0));
        case Filter::Kind::Present:
            return entry.find_attribute(filter.attribute) != nullptr;
        case Filter::Kind::Equality:
        case Filter::Kind::Approx: {
            const DirectoryAttribute* a = entry.find_attribute(filter.attribute);
            if (a == nullptr) return false;
            return std::any_of(a->values.begin(), a->values.end(),
                               [&](const Bytes& v) { return ci_equal(v, filter.value); });
        }
        case Filter::Kind::GreaterOrEqual: {
            const DirectoryAttribute* a = entry.find_attribute(filter.attribute);
            if (a == nullptr) return false;
            return std::any_of(a->values.begin(), a->values.end(), [&](const Bytes& v) {
                return order_compare(v, filter.value) >= 0;
            });
        }
        case Filter::Kind::LessOrEqual: {
            const DirectoryAttribute* a = entry.find_attribute(filter.attribute);
            if (a == nullptr) return false;
            return std::any_of(a->values.begin(), a->values.end(), [&](const Bytes& v) {
                return order_compare(v, filter.value) <= 0;
            });
        }
        case Filter::Kind::Substrings: {
            const DirectoryAttribute* a = entry.find_attribute(filter.attribute);
            if (a == nullptr) return false;
            return std::any_of(a->values.begin(), a->values.end(),
                               [&](const Bytes& v) { return substrings_match(v, filter); });
        }
    }
    return false;
}

// --------------------------------------------------------------- simulator --

namespace {

LdapResult simple_result(std::int32_t code) {
    LdapResult r;
    r.result_code = code;
    return r;
}

bool in_scope(const std::string& base_key, const DirectoryEntry& entry, std::int32_t scope) {
    const std::string entry_key = normalize_dn(entry.dn);
    switch (scope) {
        case search_scope::base_object:
            return entry_key == base_key;
        case search_scope::single_level:
            return normalize_dn(parent_dn(entry.dn)) == base_key && entry_key != base_key;
        default: {  // whole subtree: base itself or any descendant
            if (entry_key == base_key) return true;
            if (entry_key.size() <= base_key.size()) return false;
            return entry_key.compare(entry_key.size() - base_key.size(), base_key.size(),
                                     base_key) == 0 &&
                   entry_key[entry_key.size() - base_key.size() - 1] == ',';
        }
    }
}

SearchResultEntry project(const DirectoryEntry& entry, const SearchRequest& req) {
    SearchResultEntry out;
    out.object_name = entry.dn;
    const bool all = req.attributes.empty() ||
                     std::any_of(req.attributes.begin(), req.attributes.end(),
                                 [](const std::string& a) { return a == "*"; });
    for (const DirectoryAttribute& a : entry.attributes) {
        const bool wanted =
            all || std::any_of(req.attributes.begin(), req.attributes.end(),
                               [&](const std::string& want) { return ci_equal(want, a.name); });
        if (!wanted) continue;
        PartialAttribute pa;
        pa.type = a.name;
        if (!req.types_only) pa.vals = a.values;
        out.attributes.push_back(std::move(pa));
    }
    return out;
}

struct SimVisitor {
    Directory& dir;
    const SimOptions& options;
    std::int32_t message_id;
    std::vector<LdapMessage> out;

    void respond(ProtocolOp op) { out.push_back(LdapMessage{message_id, std::move(op), {}}); }

    void operator()(const BindRequest& o) {
        if (o.name.empty() && o.simple_credentials.empty()) {
            respond(BindResponse{simple_result(options.allow_anonymous_bind
                                                   ? result_code::success
                                                   : result_code::inappropriate_authentication),
                                 std::nullopt});
            return;
        }
        const DirectoryEntry* e = dir.find(o.name);
        bool ok = false;
        if (e != nullptr) {
            if (const DirectoryAttribute* pw = e->find_attribute("userPassword"))
                ok = std::any_of(pw->values.begin(), pw->values.end(),
                                 [&](const Bytes& v) { return v == o.simple_credentials; });
        }
        respond(BindResponse{
            simple_result(ok ? result_code::success : result_code::invalid_credentials),
            std::nullopt});
    }

    void operator()(const UnbindRequest&) {}
    void operator()(const AbandonRequest&) {}

    void operator()(const SearchRequest& o) {
        const DirectoryEntry* base = dir.find(o.base_object);
        if (base == nullptr) {
            respond(SearchResultDone{simple_result(result_code::no_such_object)});
            return;
        }
        const std::string base_key = normalize_dn(o.base_object);
        std::int32_t emitted = 0;
        for (const DirectoryEntry& e : dir.entries()) {
            if (o.size_limit > 0 && emitted >= o.size_limit) break;
            if (!in_scope(base_key, e, o.scope)) continue;
            if (!eval_filter(e, o.filter)) continue;
            respond(project(e, o));
            ++emitted;
        }
        respond(SearchResultDone{simple_result(result_code::success)});
    }

    void operator()(const AddRequest& o) {
        if (dir.find(o.entry) != nullptr) {
            respond(AddResponse{simple_result(result_code::entry_already_exists)});
            return;
        }
        DirectoryEntry e;
        e.dn = o.entry;
        for (const PartialAttribute& a : o.attributes)
            e.attributes.push_back(DirectoryAttribute{a.type, a.vals});
        try {
            dir.add_entry(std::move(e));
        } catch (const DirectoryError&) {
            respond(AddResponse{simple_result(result_code::no_such_object)});
            return;
        }
        respond(AddResponse{simple_result(result_code::success)});
    }

    void operator()(const DelRequest& o) {
        if (dir.find(o.dn) == nullptr) {
            respond(DelResponse{simple_result(result_code::no_such_object)});
            return;
        }
        if (dir.has_children(o.dn)) {
            respond(DelResponse{simple_result(result_code::not_allowed_on_non_leaf)});
            return;
        }
        dir.remove_entry(o.dn);
        respond(DelResponse{simple_result(result_code::success)});
    }

    void operator()(const ModifyRequest& o) {
        DirectoryEntry* e = dir.find(o.object);
        if (e == nullptr) {
            respond(ModifyResponse{simple_result(result_code::no_such_object)});
            return;
        }
        for (const ModifyChange& c : o.changes) {
            const std::string& name = c.modification.type;
            if (c.operation == modify_op::add) {
                DirectoryAttribute& a = e->get_or_add_attribute(name);
                a.values.insert(a.values.end(), c.modification.vals.begin(),
                                c.modification.vals.end());
            } else if (c.operation == modify_op::remove) {
                DirectoryAttribute* a = e->find_attribute(name);
                if (a == nullptr) {
                    respond(ModifyResponse{simple_result(result_code::no_such_attribute)});
                    return;
                }
                if (c.modification.vals.empty()) {
                    std::erase_if(e->attributes, [&](const DirectoryAttribute& x) {
                        return &x == a;
                    });
                } else {
                    for (const Bytes& v : c.modification.vals)
                        std::erase_if(a->values, [&](const Bytes& x) { return ci_equal(x, v); });
                    if (a->values.empty())
                        std::erase_if(e->attributes,
                                      [&](const DirectoryAttribute& x) { return &x == a; });
                }
            } else {  // replace
                if (c.modification.vals.empty()) {
                    std::erase_if(e->attributes, [&](const DirectoryAttribute& x) {
                        return ci_equal(x.name, name);
                    });
                } else {
                    DirectoryAttribute& a = e->get_or_add_attribute(name);
                    a.values = c.modification.vals;
                }
            }
        }
        respond(ModifyResponse{simple_result(result_code::success)});
    }

    void operator()(const ModifyDnRequest& o) {
        DirectoryEntry* e = dir.find(o.entry);
        if (e == nullptr) {
            respond(ModifyDnResponse{simple_result(result_code::no_such_object)});
            return;
        }
        if (dir.has_children(o.entry)) {
            respond(ModifyDnResponse{simple_result(result_code::not_allowed_on_non_leaf)});
            return;
        }
        const std::string parent = o.new_superior ? *o.new_superior : parent_dn(e->dn);
        if (parent.empty() || dir.find(parent) == nullptr) {
            respond(ModifyDnResponse{simple_result(result_code::no_such_object)});
            return;
        }
        const std::string new_dn = o.new_rdn + "," + parent;
        if (normalize_dn(new_dn) != normalize_dn(e->dn) && dir.find(new_dn) != nullptr) {
            respond(ModifyDnResponse{simple_result(result_code::entry_already_exists)});
            return;
        }
        // split both RDNs into attribute=value to maintain the naming attribute
        auto rdn_parts = [](std::string_view rdn) -> std::pair<std::string, std::string> {
            const std::size_t eq = rdn.find('=');
            if (eq == std::string_view::npos) return {"", ""};
            return {trim(rdn.substr(0, eq)), trim(rdn.substr(eq + 1))};
        };
        const auto old_parts = rdn_parts(split_dn(e->dn).front());
        const auto new_parts = rdn_parts(o.new_rdn);
        if (o.delete_old_rdn && !old_parts.first.empty()) {
            if (DirectoryAttribute* a = e->find_attribute(old_parts.first)) {
                std::erase_if(a->values,
                              [&](const Bytes& v) { return ci_equal(v, old_parts.second); });
                if (a->values.empty())
                    std::erase_if(e->attributes,
                                  [&](const DirectoryAttribute& x) { return &x == a; });
            }
        }
        if (!new_parts.first.empty()) {
            DirectoryAttribute& a = e->get_or_add_attribute(new_parts.first);
            if (std::none_of(a.values.begin(), a.values.end(),
                             [&](const Bytes& v) { return ci_equal(v, new_parts.second); }))
                a.values.push_back(new_parts.second);
        }
        e->dn = new_dn;
        respond(ModifyDnResponse{simple_result(result_code::success)});
    }

    void operator()(const CompareRequest& o) {
        const DirectoryEntry* e = dir.find(o.entry);
        if (e == nullptr) {
            respond(CompareResponse{simple_result(result_code::no_such_object)});
            return;
        }
        bool matches = false;
        if (const DirectoryAttribute* a = e->find_attribute(o.attribute_desc))
            matches = std::any_of(a->values.begin(), a->values.end(), [&](const Bytes& v) {
                return ci_equal(v, o.assertion_value);
            });
        respond(CompareResponse{simple_result(matches ? result_code::compare_true
                                                      : result_code::compare_false)});
    }

    void operator()(const ExtendedRequest& o) {
        ExtendedResponse resp;
        resp.result = simple_result(result_code::unwilling_to_perform);
        resp.response_name = o.request_name;
        respond(std::move(resp));
    }

    // response operations arriving as "requests" get no reply
    void operator()(const BindResponse&) {}
    void operator()(const SearchResultEntry&) {}
    void operator()(const SearchResultDone&) {}
    void operator()(const SearchResultReference&) {}
    void operator()(const ModifyResponse&) {}
    void operator()(const AddResponse&) {}
    void operator()(const DelResponse&) {}
    void operator()(const ModifyDnResponse&) {}
    void operator()(const CompareResponse&) {}
    void operator()(const ExtendedResponse&) {}
};

}  // namespace

std::vector<Json> respond_sim(const Json& request, Directory& directory,
                              const SimOptions& options) {
    LdapMessage m = jsonio::json_to_message(request);
    SimVisitor v{directory, options, m.message_id, {}};
    std::visit(v, m.op);
    std::vector<Json> docs;
    docs.reserve(v.out.size());
    for (const LdapMessage& r : v.out) docs.push_back(jsonio::message_to_json(r));
    return docs;
}

}  // namespace ldapot
