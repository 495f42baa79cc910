#include "doctest.h"

#include <algorithm>

#include "agentaudit/errors.hpp"
#include "agentaudit/judge.hpp"

using namespace agentaudit;
using nlohmann::json;

namespace {

FunctionSpec send_email_spec() {
    FunctionSpec fn;
    fn.name = "send_email";
    fn.description = "Send an email message with the given text content to a recipient";
    fn.params = {{"recipient", "destination", TypeSignature::primitive("str"), true},
                 {"body", "text content", TypeSignature::primitive("str"), true}};
    fn.return_signature = TypeSignature::primitive("str");
    fn.role = Role::Sink;
    return fn;
}

JudgeQuery motivating_query() {
    JudgeQuery query;
    query.intent_text = "email the payment date and amount to the auditor";
    query.intent_fields = {"payment_date", "amount"};
    query.sink = send_email_spec();
    query.payload = {{"recipient", "auditor@example.com"},
                     {"payment_date", "2024-03-12"},
                     {"amount", "$1,250.00"},
                     {"credit_card", "4111-5678-9012-3456"},
                     {"cvv", "913"}};
    return query;
}

FieldVerdict v(FieldCategory category, const std::string& backend = "m") {
    FieldVerdict verdict;
    verdict.field = "recipient";
    verdict.category = category;
    verdict.reasoning = "r";
    verdict.backend_id = backend;
    return verdict;
}

} // namespace

TEST_CASE("audit prompt fills the four slots and keeps the principle sections") {
    RegulationCorpus regs = RegulationCorpus::builtin();
    JudgeQuery query = motivating_query();
    std::string prompt = build_audit_prompt(query.intent_text, query.sink, query.payload, regs);

    CHECK(prompt.find("Senior Data Privacy Auditor") != std::string::npos);
    CHECK(prompt.find("Data Minimization") != std::string::npos);
    CHECK(prompt.find("Least Privilege") != std::string::npos);
    CHECK(prompt.find("Full_Invoice.pdf") != std::string::npos);   // few-shot example
    CHECK(prompt.find("Input [User Intent]: " + query.intent_text) != std::string::npos);
    CHECK(prompt.find("send_email(recipient: str, body: str)") != std::string::npos);
    for (const auto& field : query.payload) {
        CHECK(prompt.find(field.name + ": \"" + field.value + "\"") != std::string::npos);
    }
    CHECK(prompt.find("--- GDPR ---") != std::string::npos);
    CHECK(prompt.find("--- CCPA ---") != std::string::npos);
    CHECK(prompt.find("--- PIPL ---") != std::string::npos);
    CHECK(prompt.rfind("Auditing Result (Field | Category | Reasoning):\n") ==
          prompt.size() - std::string("Auditing Result (Field | Category | Reasoning):\n").size());

    SUBCASE("single regulation document fills a single slot") {
        RegulationCorpus one = regs;
        one.documents = {regs.documents[0]};
        std::string single = build_audit_prompt(query.intent_text, query.sink, query.payload, one);
        CHECK(single.find("--- GDPR ---") != std::string::npos);
        CHECK(single.find("--- CCPA ---") == std::string::npos);
    }

    SUBCASE("single-field payload renders one row") {
        std::vector<DataField> payload = {{"recipient", "x@y"}};
        std::string single = build_audit_prompt(query.intent_text, query.sink, payload, regs);
        CHECK(single.find("recipient: \"x@y\"") != std::string::npos);
    }

    SUBCASE("empty payload is a precondition violation") {
        CHECK_THROWS_AS(build_audit_prompt(query.intent_text, query.sink, {}, regs), AuditError);
    }
}

TEST_CASE("verdict tables parse tolerantly") {
    auto verdicts = parse_verdict_table(
        "Here is my audit:\n"
        "Field | Category | Reasoning\n"
        "cvv | overExposed | not needed for date transfer\n"
        "recipient | necessary | delivery target\n"
        "Thanks!");
    REQUIRE(verdicts.size() == 2);
    CHECK(verdicts[0].field == "cvv");
    CHECK(verdicts[0].category == FieldCategory::OverExposed);
    CHECK(verdicts[0].reasoning == "not needed for date transfer");
    CHECK(verdicts[1].category == FieldCategory::Necessary);

    CHECK(parse_verdict_table("").empty());
    CHECK(parse_verdict_table("no table at all").empty());

    auto odd = parse_verdict_table("amount | maybe | unsure");
    REQUIRE(odd.size() == 1);
    CHECK(odd[0].category == FieldCategory::Unresolved);
}

TEST_CASE("majority vote takes the strict majority") {
    CHECK(majority_vote({v(FieldCategory::OverExposed, "a"), v(FieldCategory::OverExposed, "b"),
                         v(FieldCategory::Necessary, "c")})
              .category == FieldCategory::OverExposed);
    CHECK(majority_vote({v(FieldCategory::Necessary, "a")}).category ==
          FieldCategory::Necessary);

    SUBCASE("even split resolves conservatively to overExposed") {
        CHECK(majority_vote({v(FieldCategory::Necessary, "a"), v(FieldCategory::OverExposed, "b")})
                  .category == FieldCategory::OverExposed);
        CHECK(majority_vote({v(FieldCategory::Necessary, "a"), v(FieldCategory::Intended, "b")})
                  .category == FieldCategory::OverExposed);
    }
    SUBCASE("strict tie mode raises instead") {
        try {
            majority_vote({v(FieldCategory::Necessary, "a"), v(FieldCategory::OverExposed, "b")},
                          true);
            FAIL("expected UnresolvedTie");
        } catch (const AuditError& e) {
            CHECK(e.code() == ErrorCode::UnresolvedTie);
        }
    }
}

TEST_CASE("voting is permutation invariant — exhaustive 3-member space") {
    const FieldCategory cats[] = {FieldCategory::Intended, FieldCategory::Necessary,
                                  FieldCategory::OverExposed};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                std::vector<FieldVerdict> verdicts = {v(cats[i], "a"), v(cats[j], "b"),
                                                      v(cats[k], "c")};
                FieldVerdict base = majority_vote(verdicts);
                std::sort(verdicts.begin(), verdicts.end(),
                          [](const FieldVerdict& x, const FieldVerdict& y) {
                              return x.backend_id < y.backend_id;
                          });
                do {
                    FieldVerdict permuted = majority_vote(verdicts);
                    CHECK(permuted.category == base.category);
                    CHECK(permuted.reasoning == base.reasoning);
                } while (std::next_permutation(
                    verdicts.begin(), verdicts.end(),
                    [](const FieldVerdict& x, const FieldVerdict& y) {
                        return x.backend_id < y.backend_id;
                    }));
            }
        }
    }
}

TEST_CASE("quorum law: one flipped verdict never moves a unanimous 3-member vote") {
    const FieldCategory cats[] = {FieldCategory::Intended, FieldCategory::Necessary,
                                  FieldCategory::OverExposed};
    for (FieldCategory unanimous : cats) {
        for (FieldCategory flipped : cats) {
            for (int position = 0; position < 3; ++position) {
                std::vector<FieldVerdict> verdicts = {v(unanimous, "a"), v(unanimous, "b"),
                                                      v(unanimous, "c")};
                verdicts[position].category = flipped;
                CHECK(majority_vote(verdicts).category == unanimous);
            }
        }
    }
}

TEST_CASE("mock committee reaches the motivating consensus") {
    JudgeQuery query = motivating_query();
    Committee committee = mock_committee();
    RegulationCorpus regs = RegulationCorpus::builtin();

    JudgeTranscript transcript;
    auto consensus = judge_field_necessity(query, regs, committee, nullptr, &transcript);

    CHECK(consensus.at("recipient").category == FieldCategory::Necessary);
    CHECK(consensus.at("payment_date").category == FieldCategory::Intended);
    CHECK(consensus.at("amount").category == FieldCategory::Intended);
    CHECK(consensus.at("credit_card").category == FieldCategory::OverExposed);
    CHECK(consensus.at("cvv").category == FieldCategory::OverExposed);
    CHECK(transcript.responses.size() == 3);
    CHECK(!transcript.prompt.empty());

    SUBCASE("identical inputs give identical consensus bytes") {
        auto again = judge_field_necessity(query, regs, committee, nullptr);
        REQUIRE(again.size() == consensus.size());
        for (const auto& [field, verdict] : consensus) {
            CHECK(again.at(field) == verdict);
        }
    }

    SUBCASE("single-member committee returns that member's verdicts verbatim") {
        Committee solo;
        solo.members = {committee.members[0]};
        auto verdicts = judge_field_necessity(query, regs, solo, nullptr);
        CHECK(verdicts.at("cvv").category == FieldCategory::OverExposed);
        CHECK(verdicts.at("recipient").category == FieldCategory::Necessary);
    }

    SUBCASE("remote members without a gateway fail; quorum decides survival") {
        Committee mixed = committee;
        mixed.members[2].kind = "openai";   // fails: no gateway registered
        auto verdicts = judge_field_necessity(query, regs, mixed, nullptr);
        CHECK(verdicts.at("cvv").category == FieldCategory::OverExposed);

        Committee hopeless = committee;
        for (auto& m : hopeless.members) m.kind = "openai";
        try {
            judge_field_necessity(query, regs, hopeless, nullptr);
            FAIL("expected JudgeUnavailable");
        } catch (const AuditError& e) {
            CHECK(e.code() == ErrorCode::JudgeUnavailable);
        }
    }
}

TEST_CASE("committee judge hands taint exactly the necessary set") {
    JudgeQuery query = motivating_query();
    CommitteeNecessityJudge judge(mock_committee(), RegulationCorpus::builtin());

    auto categories = judge.assess(query.sink, query.payload, query.intent_fields,
                                   query.intent_text);
    std::set<std::string> d_nec;
    for (const auto& [field, category] : categories) {
        if (category == FieldCategory::Necessary) d_nec.insert(field);
    }

    auto consensus = judge_field_necessity(query, RegulationCorpus::builtin(), mock_committee(),
                                           nullptr);
    std::set<std::string> expected;
    for (const auto& [field, verdict] : consensus) {
        if (verdict.category == FieldCategory::Necessary) expected.insert(field);
    }
    CHECK(d_nec == expected);
    CHECK(d_nec == std::set<std::string>{"recipient"});
}

TEST_CASE("committee config parsing enforces the tie rule") {
    Committee c = parse_committee(json{{"members", json::array({{{"id", "m1"}},
                                                                {{"id", "m2"}},
                                                                {{"id", "m3"}}})}});
    CHECK(c.members.size() == 3);
    CHECK(c.quorum() == 2);

    CHECK_THROWS_AS(parse_committee(json{{"members", json::array()}}), AuditError);
    CHECK_THROWS_AS(
        parse_committee(json{{"members", json::array({{{"id", "m1"}}, {{"id", "m2"}}})},
                             {"strict_ties", true}}),
        AuditError);
}
