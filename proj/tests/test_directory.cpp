// test_directory.cpp — LDIF loading, filter evaluation and the deterministic
// request simulator.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "ldapot/directory.hpp"
#include "support/random_message.hpp"

using namespace ldapot;

namespace {

Directory corp() { return load_directory_file(std::string(LDAPOT_DATA_DIR) + "/corp.ldif"); }

Directory from_text(const std::string& text) {
    std::istringstream in(text);
    return load_directory(in);
}

Json doc(const LdapMessage& m) { return jsonio::message_to_json(m); }

Json search_doc(std::int32_t id, const std::string& base, std::int32_t scope, Filter f,
                std::int32_t size_limit = 0, std::vector<std::string> attrs = {}) {
    SearchRequest o;
    o.base_object = base;
    o.scope = scope;
    o.size_limit = size_limit;
    o.filter = std::move(f);
    o.attributes = std::move(attrs);
    return doc(LdapMessage{id, o, {}});
}

Json bind_doc(std::int32_t id, const std::string& name, const std::string& password) {
    BindRequest o;
    o.name = name;
    o.simple_credentials = password;
    return doc(LdapMessage{id, o, {}});
}

std::string op_of(const Json& d) { return d.at("protocolOp").begin().key(); }

std::int32_t code_of(const Json& d) {
    return d.at("protocolOp").begin()->at("resultCode").get<std::int32_t>();
}

}  // namespace

TEST_CASE("sample directory loads with full fidelity") {
    Directory d = corp();
    CHECK(d.suffix() == "dc=corp,dc=local");
    CHECK(d.size() == 13);

    const DirectoryEntry* bob = d.find("CN=Bob,OU=People,DC=corp,DC=local");  // case-blind
    REQUIRE(bob != nullptr);
    const DirectoryAttribute* pw = bob->find_attribute("userpassword");
    REQUIRE(pw != nullptr);
    CHECK(pw->values == std::vector<Bytes>{"sup3rs3cr3t"});  // base64 decoded

    const DirectoryEntry* carol = d.find("cn=carol,ou=People,dc=corp,dc=local");
    REQUIRE(carol != nullptr);
    CHECK(carol->find_attribute("description")->values ==
          std::vector<Bytes>{"handles quarterly reporting and vendor reconciliation"});

    const DirectoryEntry* root = d.find("dc=corp,dc=local");
    REQUIRE(root != nullptr);
    CHECK(root->find_attribute("objectClass")->values ==
          std::vector<Bytes>{"top", "dcObject", "organization"});
    CHECK(d.has_children("ou=People,dc=corp,dc=local"));
    CHECK_FALSE(d.has_children("cn=alice,ou=People,dc=corp,dc=local"));
}

TEST_CASE("two-record input yields two entries") {
    Directory d = from_text("dn: dc=x\nobjectClass: top\n\ndn: ou=A,dc=x\nou: A\n");
    CHECK(d.size() == 2);
    CHECK(d.suffix() == "dc=x");
}

TEST_CASE("loader rejects broken input with line numbers") {
    CHECK_THROWS_AS(from_text("dn: dc=x\nobjectClass top\n"), LdifSyntaxError);
    CHECK_THROWS_AS(from_text("objectClass: top\n"), LdifSyntaxError);          // no dn
    CHECK_THROWS_AS(from_text(" leading continuation\n"), LdifSyntaxError);
    CHECK_THROWS_AS(from_text("dn: dc=x\nuserPassword:: !!!\n"), LdifSyntaxError);
    CHECK_THROWS_AS(from_text("dn: dc=x\n\ndn: dc=x\n"), LdifSyntaxError);      // duplicate
    CHECK_THROWS_AS(from_text(""), LdifSyntaxError);                            // empty

    try {
        from_text("dn: dc=x\nobjectClass: top\n\ndn: ou=A,dc=x\nbroken line here\n");
        FAIL("expected LdifSyntaxError");
    } catch (const LdifSyntaxError& e) {
        CHECK(e.line() == 5);
    }

    // record whose parent never appears
    CHECK_THROWS_AS(from_text("dn: dc=x\n\ndn: ou=A,dc=other\nou: A\n"), OrphanEntryError);
    CHECK_THROWS_AS(from_text("dn: ou=A,dc=x\nou: A\n\ndn: dc=x\n"), OrphanEntryError);
}

TEST_CASE("filter evaluation semantics") {
    Directory d = corp();
    const DirectoryEntry& alice = *d.find("cn=alice,ou=People,dc=corp,dc=local");

    CHECK(eval_filter(alice, Filter::equality("objectClass", "person")));
    CHECK(eval_filter(alice, Filter::equality("OBJECTCLASS", "PERSON")));  // both sides ci
    CHECK_FALSE(eval_filter(alice, Filter::equality("objectClass", "device")));
    CHECK_FALSE(eval_filter(alice, Filter::equality("nonexistent", "x")));

    CHECK(eval_filter(alice, Filter::present("mail")));
    CHECK_FALSE(eval_filter(alice, Filter::present("memberOf")));

    CHECK_FALSE(eval_filter(alice, Filter::not_of(Filter::equality("cn", "alice"))));
    CHECK(eval_filter(alice, Filter::and_of({Filter::present("mail"),
                                             Filter::equality("sn", "liddell")})));
    CHECK(eval_filter(alice, Filter::or_of({Filter::equality("cn", "zzz"),
                                            Filter::equality("cn", "alice")})));
    CHECK_FALSE(eval_filter(alice, Filter::or_of({Filter::equality("cn", "zzz"),
                                                  Filter::equality("cn", "yyy")})));

    CHECK(eval_filter(alice, Filter::substrings("mail", "ali", {"@"}, "local")));
    CHECK(eval_filter(alice, Filter::substrings("cn", std::nullopt, {"lic"}, std::nullopt)));
    CHECK_FALSE(eval_filter(alice, Filter::substrings("cn", "lice", {}, std::nullopt)));
    CHECK_FALSE(eval_filter(alice, Filter::substrings("mail", "local", {}, "ali")));  // order

    // numeric comparison when both sides are integers
    CHECK(eval_filter(alice, Filter::greater_or_equal("departmentNumber", "9001")));
    CHECK(eval_filter(alice, Filter::greater_or_equal("departmentNumber", "999")));
    CHECK_FALSE(eval_filter(alice, Filter::greater_or_equal("departmentNumber", "9002")));
    CHECK(eval_filter(alice, Filter::less_or_equal("departmentNumber", "10000")));
    // lexicographic, case-blind, when not numeric
    CHECK(eval_filter(alice, Filter::greater_or_equal("sn", "Alpha")));
    CHECK_FALSE(eval_filter(alice, Filter::greater_or_equal("sn", "zeta")));

    CHECK(eval_filter(alice, Filter::approx("sn", "LIDDELL")));
}

TEST_CASE("filter algebra properties") {
    Directory d = corp();
    std::mt19937 rng(31337);
    for (int i = 0; i < 200; ++i) {
        Filter f = testsupport::random_filter(rng);
        const DirectoryEntry& e = d.entries()[rng() % d.size()];
        CHECK(eval_filter(e, Filter::and_of({f})) == eval_filter(e, f));
        CHECK(eval_filter(e, Filter::not_of(Filter::not_of(f))) == eval_filter(e, f));
    }
}

TEST_CASE("simulated search answers the canonical person query") {
    Directory d = corp();
    Json req = search_doc(9, "dc=corp,dc=local", 2, Filter::equality("objectClass", "person"),
                          20, {"cn", "sn", "mail", "objectClass"});
    auto out = respond_sim(req, d);
    REQUIRE(out.size() == 9);  // eight people + the closing message
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        CHECK(op_of(out[i]) == "searchResEntry");
        CHECK(out[i].at("messageID") == 9);
        // only the requested attributes are projected
        for (const auto& attr : out[i].at("protocolOp").at("searchResEntry").at("attributes"))
            CHECK((attr.at("type") == "cn" || attr.at("type") == "sn" ||
                   attr.at("type") == "mail" || attr.at("type") == "objectClass"));
    }
    CHECK(op_of(out.back()) == "searchResDone");
    CHECK(code_of(out.back()) == result_code::success);
    CHECK(out.back().at("messageID") == 9);

    // first hit follows document order
    CHECK(out[0].at("protocolOp").at("searchResEntry").at("objectName") ==
          "cn=alice,ou=People,dc=corp,dc=local");
}

TEST_CASE("search scope, size limit and missing base behavior") {
    Directory d = corp();

    auto all = respond_sim(search_doc(1, "ou=People,dc=corp,dc=local", 1,
                                      Filter::present("objectClass")), d);
    CHECK(all.size() == 6);  // five direct children + closing

    auto base_only = respond_sim(search_doc(2, "ou=People,dc=corp,dc=local", 0,
                                            Filter::present("objectClass")), d);
    REQUIRE(base_only.size() == 2);
    CHECK(base_only[0].at("protocolOp").at("searchResEntry").at("objectName") ==
          "ou=People,dc=corp,dc=local");

    auto capped = respond_sim(search_doc(3, "dc=corp,dc=local", 2,
                                         Filter::equality("objectClass", "person"), 3), d);
    CHECK(capped.size() == 4);  // three entries + closing, success regardless
    CHECK(code_of(capped.back()) == result_code::success);

    auto missing = respond_sim(search_doc(4, "dc=nowhere", 2,
                                          Filter::present("objectClass")), d);
    REQUIRE(missing.size() == 1);
    CHECK(op_of(missing[0]) == "searchResDone");
    CHECK(code_of(missing[0]) == result_code::no_such_object);

    // typesOnly drops the values but keeps the names
    SearchRequest to;
    to.base_object = "cn=alice,ou=People,dc=corp,dc=local";
    to.scope = 0;
    to.types_only = true;
    to.filter = Filter::present("objectClass");
    auto names_only = respond_sim(doc(LdapMessage{5, to, {}}), d);
    REQUIRE(names_only.size() == 2);
    for (const auto& attr : names_only[0].at("protocolOp").at("searchResEntry").at("attributes"))
        CHECK(attr.at("vals").empty());
}

TEST_CASE("simulated bind checks credentials") {
    Directory d = corp();
    CHECK(code_of(respond_sim(bind_doc(1, "cn=alice,ou=People,dc=corp,dc=local", "rabbith0le"),
                              d).at(0)) == result_code::success);
    CHECK(code_of(respond_sim(bind_doc(2, "cn=alice,ou=People,dc=corp,dc=local", "wrong"),
                              d).at(0)) == result_code::invalid_credentials);
    // base64-loaded password compares against its decoded bytes
    CHECK(code_of(respond_sim(bind_doc(3, "cn=bob,ou=People,dc=corp,dc=local", "sup3rs3cr3t"),
                              d).at(0)) == result_code::success);
    CHECK(code_of(respond_sim(bind_doc(4, "cn=ghost,dc=corp,dc=local", "boo"), d).at(0)) ==
          result_code::invalid_credentials);

    CHECK(code_of(respond_sim(bind_doc(5, "", ""), d).at(0)) == result_code::success);
    SimOptions strict;
    strict.allow_anonymous_bind = false;
    CHECK(code_of(respond_sim(bind_doc(6, "", ""), d, strict).at(0)) ==
          result_code::inappropriate_authentication);

    auto resp = respond_sim(bind_doc(7, "cn=admin,dc=corp,dc=local", "hunter2"), d);
    REQUIRE(resp.size() == 1);
    CHECK(op_of(resp[0]) == "bindResponse");
    CHECK(resp[0].at("messageID") == 7);
}

TEST_CASE("mutating operations update the tree with real result codes") {
    Directory d = corp();

    SUBCASE("add, duplicate add, orphan add") {
        AddRequest add;
        add.entry = "cn=iris,ou=People,dc=corp,dc=local";
        add.attributes = {{"objectClass", {"top", "person"}}, {"cn", {"iris"}}, {"sn", {"mond"}}};
        CHECK(code_of(respond_sim(doc(LdapMessage{1, add, {}}), d).at(0)) ==
              result_code::success);
        CHECK(d.find("cn=iris,ou=People,dc=corp,dc=local") != nullptr);
        CHECK(code_of(respond_sim(doc(LdapMessage{2, add, {}}), d).at(0)) ==
              result_code::entry_already_exists);

        AddRequest orphan;
        orphan.entry = "cn=lost,ou=Nowhere,dc=corp,dc=local";
        CHECK(code_of(respond_sim(doc(LdapMessage{3, orphan, {}}), d).at(0)) ==
              result_code::no_such_object);
    }

    SUBCASE("delete leaf, missing, non-leaf") {
        CHECK(code_of(respond_sim(doc(LdapMessage{1, DelRequest{"cn=dave,ou=People,dc=corp,dc=local"}, {}}),
                                  d).at(0)) == result_code::success);
        CHECK(d.find("cn=dave,ou=People,dc=corp,dc=local") == nullptr);
        CHECK(code_of(respond_sim(doc(LdapMessage{2, DelRequest{"cn=dave,ou=People,dc=corp,dc=local"}, {}}),
                                  d).at(0)) == result_code::no_such_object);
        CHECK(code_of(respond_sim(doc(LdapMessage{3, DelRequest{"ou=People,dc=corp,dc=local"}, {}}),
                                  d).at(0)) == result_code::not_allowed_on_non_leaf);
        CHECK(d.find("ou=People,dc=corp,dc=local") != nullptr);
    }

    SUBCASE("modify replace and delete") {
        ModifyRequest mod;
        mod.object = "cn=alice,ou=People,dc=corp,dc=local";
        ModifyChange c;
        c.operation = modify_op::replace;
        c.modification = {"mail", {"alice.liddell@corp.local"}};
        mod.changes.push_back(c);
        CHECK(code_of(respond_sim(doc(LdapMessage{1, mod, {}}), d).at(0)) ==
              result_code::success);
        CHECK(d.find("cn=alice,ou=People,dc=corp,dc=local")->find_attribute("mail")->values ==
              std::vector<Bytes>{"alice.liddell@corp.local"});

        ModifyRequest bad;
        bad.object = "cn=alice,ou=People,dc=corp,dc=local";
        ModifyChange del;
        del.operation = modify_op::remove;
        del.modification = {"pager", {}};
        bad.changes.push_back(del);
        CHECK(code_of(respond_sim(doc(LdapMessage{2, bad, {}}), d).at(0)) ==
              result_code::no_such_attribute);

        ModifyRequest missing;
        missing.object = "cn=nobody,dc=corp,dc=local";
        CHECK(code_of(respond_sim(doc(LdapMessage{3, missing, {}}), d).at(0)) ==
              result_code::no_such_object);
    }

    SUBCASE("rename updates the dn and the naming attribute") {
        ModifyDnRequest mv;
        mv.entry = "cn=bob,ou=People,dc=corp,dc=local";
        mv.new_rdn = "cn=robert";
        mv.delete_old_rdn = true;
        mv.new_superior = "ou=Engineering,dc=corp,dc=local";
        CHECK(code_of(respond_sim(doc(LdapMessage{1, mv, {}}), d).at(0)) ==
              result_code::success);
        CHECK(d.find("cn=bob,ou=People,dc=corp,dc=local") == nullptr);
        const DirectoryEntry* moved = d.find("cn=robert,ou=Engineering,dc=corp,dc=local");
        REQUIRE(moved != nullptr);
        CHECK(moved->find_attribute("cn")->values == std::vector<Bytes>{"robert"});

        ModifyDnRequest gone;
        gone.entry = "cn=zeta,dc=corp,dc=local";
        gone.new_rdn = "cn=eta";
        CHECK(code_of(respond_sim(doc(LdapMessage{2, gone, {}}), d).at(0)) ==
              result_code::no_such_object);
    }
}

TEST_CASE("compare, extended, and silent operations") {
    Directory d = corp();
    CompareRequest cmp;
    cmp.entry = "cn=alice,ou=People,dc=corp,dc=local";
    cmp.attribute_desc = "mail";
    cmp.assertion_value = "alice@corp.local";
    CHECK(code_of(respond_sim(doc(LdapMessage{1, cmp, {}}), d).at(0)) ==
          result_code::compare_true);
    cmp.assertion_value = "other@corp.local";
    CHECK(code_of(respond_sim(doc(LdapMessage{2, cmp, {}}), d).at(0)) ==
          result_code::compare_false);
    cmp.entry = "cn=nobody,dc=corp,dc=local";
    CHECK(code_of(respond_sim(doc(LdapMessage{3, cmp, {}}), d).at(0)) ==
          result_code::no_such_object);

    ExtendedRequest ext;
    ext.request_name = "1.3.6.1.4.1.4203.1.11.3";
    auto out = respond_sim(doc(LdapMessage{4, ext, {}}), d);
    REQUIRE(out.size() == 1);
    CHECK(op_of(out[0]) == "extendedResp");
    CHECK(code_of(out[0]) == result_code::unwilling_to_perform);
    CHECK(out[0].at("protocolOp").at("extendedResp").at("responseName") ==
          "1.3.6.1.4.1.4203.1.11.3");

    CHECK(respond_sim(doc(LdapMessage{5, UnbindRequest{}, {}}), d).empty());
    CHECK(respond_sim(doc(LdapMessage{6, AbandonRequest{3}, {}}), d).empty());
}

TEST_CASE("identical directory and request produce identical responses") {
    Json req = search_doc(42, "dc=corp,dc=local", 2, Filter::present("objectClass"), 0, {"*"});
    Directory d1 = corp();
    Directory d2 = corp();
    auto a = respond_sim(req, d1);
    auto b = respond_sim(req, d2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(jsonio::dump_document(a[i]) == jsonio::dump_document(b[i]));
    CHECK(a.size() == 14);  // all thirteen entries + closing
}
