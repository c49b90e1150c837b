// directory.hpp
//
// Deterministic in-memory directory over an LDIF subset: tree of entries,
// filter evaluation, and a full request->responses simulator that serves as
// oracle, fallback backend, and ground-truth generator.

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ldapot/json_codec.hpp"
#include "ldapot/message.hpp"

namespace ldapot {

class DirectoryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class LdifSyntaxError : public DirectoryError {
  public:
    LdifSyntaxError(std::size_t line, const std::string& msg)
        : DirectoryError("ldif line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class OrphanEntryError : public DirectoryError {
  public:
    explicit OrphanEntryError(const std::string& dn)
        : DirectoryError("entry has no parent in the directory: " + dn) {}
};

struct DirectoryAttribute {
    std::string name;  // original spelling; matched case-insensitively
    std::vector<Bytes> values;

    bool operator==(const DirectoryAttribute&) const = default;
};

struct DirectoryEntry {
    std::string dn;  // original case preserved; matched case-insensitively
    std::vector<DirectoryAttribute> attributes;

    const DirectoryAttribute* find_attribute(std::string_view name) const;
    DirectoryAttribute* find_attribute(std::string_view name);
    DirectoryAttribute& get_or_add_attribute(std::string_view name);

    bool operator==(const DirectoryEntry&) const = default;
};

// DN helpers (comma-separated components, backslash escapes honored).
std::vector<std::string> split_dn(std::string_view dn);
std::string normalize_dn(std::string_view dn);
std::string parent_dn(std::string_view dn);

class Directory {
  public:
    const std::string& suffix() const { return suffix_; }
    std::size_t size() const { return entries_.size(); }
    // document order: the order entries appeared in the LDIF / were added
    const std::vector<DirectoryEntry>& entries() const { return entries_; }

    const DirectoryEntry* find(std::string_view dn) const;
    DirectoryEntry* find(std::string_view dn);
    bool has_children(std::string_view dn) const;

    // used by the loader and the mutation operations; parentage enforced
    void add_entry(DirectoryEntry entry);      // throws OrphanEntryError / DirectoryError
    bool remove_entry(std::string_view dn);    // false if absent; refuses non-leaf

  private:
    std::string suffix_;
    std::vector<DirectoryEntry> entries_;
};

// Parse the LDIF subset: records separated by blank lines, "dn:" first,
// "attr: value" lines, continuations by a leading space, "attr:: " base64.
Directory load_directory(std::istream& in);
Directory load_directory_file(const std::string& path);  // adds the path to errors

// RFC-style matching; unknown attributes simply do not match.
bool eval_filter(const DirectoryEntry& entry, const Filter& filter);

struct SimOptions {
    bool allow_anonymous_bind = true;
};

// Answer one request document with the ordered response documents a real
// server would produce.  Mutating operations update the directory in place.
// Deterministic: identical (directory, request) gives identical output.
std::vector<Json> respond_sim(const Json& request, Directory& directory,
                              const SimOptions& options = {});

}  // namespace ldapot
