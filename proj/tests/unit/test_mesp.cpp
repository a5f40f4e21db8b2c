#include "lmn/mesp.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lmn;

namespace {

constexpr std::string_view kAppendixLine = "1: (Label: Allow), (Role: User), (Resource: System)";

std::size_t count_severity(const ParseResult& r, Severity s) {
    std::size_t n = 0;
    for (const auto& d : r.diagnostics)
        if (d.severity == s) ++n;
    return n;
}

} // namespace

TEST(ParseMesp, AppendixExampleLine) {
    const auto r = parse_mesp(kAppendixLine);
    ASSERT_EQ(r.policy.size(), 1u);
    EXPECT_TRUE(r.diagnostics.empty());
    const auto& rule = r.policy.rules()[0];
    EXPECT_EQ(rule.decision, Decision::Allow);
    ASSERT_EQ(rule.user_cond.size(), 1u);
    EXPECT_EQ(rule.user_cond.clauses()[0].attribute, AttributeRef(AttributeCategory::User, "Role"));
    EXPECT_EQ(rule.user_cond.clauses()[0].value, "User");
    ASSERT_EQ(rule.object_cond.size(), 1u);
    EXPECT_EQ(rule.object_cond.clauses()[0].attribute, AttributeRef(AttributeCategory::Object, "Resource"));
    EXPECT_EQ(rule.object_cond.clauses()[0].value, "System");
    EXPECT_TRUE(rule.env_cond.empty());
    EXPECT_FALSE(rule.operation);
}

TEST(ParseMesp, EmptyInput) {
    const auto r = parse_mesp("");
    EXPECT_TRUE(r.policy.empty());
    EXPECT_EQ(r.error_count(), 0u);
}

TEST(ParseMesp, UnknownDecisionAndGarbageLine) {
    const auto r = parse_mesp("1: (Label: Permit), (Role: User)\nnot a rule line");
    ASSERT_EQ(r.policy.size(), 1u);
    EXPECT_EQ(r.policy.rules()[0].decision, Decision::Allow);
    ASSERT_EQ(r.diagnostics.size(), 2u);
    EXPECT_EQ(r.diagnostics[0].line_number, 1u);
    EXPECT_EQ(r.diagnostics[0].severity, Severity::Warning);
    EXPECT_NE(r.diagnostics[0].message.find("Permit"), std::string::npos);
    EXPECT_EQ(r.diagnostics[1].line_number, 2u);
    EXPECT_EQ(r.diagnostics[1].severity, Severity::Error);
    EXPECT_EQ(r.diagnostics[1].raw_line, "not a rule line");
    EXPECT_EQ(r.skipped_lines, 1u);
}

TEST(ParseMesp, MissingLabelDefaultsToAllowWithWarning) {
    const auto r = parse_mesp("1: (Role: User)");
    ASSERT_EQ(r.policy.size(), 1u);
    EXPECT_EQ(r.policy.rules()[0].decision, Decision::Allow);
    EXPECT_EQ(count_severity(r, Severity::Warning), 1u);
}

TEST(ParseMesp, DecisionTokensAreCaseInsensitive) {
    const auto r = parse_mesp("1: (label: DENY), (role: User)");
    ASSERT_EQ(r.policy.size(), 1u);
    EXPECT_EQ(r.policy.rules()[0].decision, Decision::Deny);
    EXPECT_TRUE(r.diagnostics.empty());
}

TEST(ParseMesp, RenumbersWithWarning) {
    const auto r = parse_mesp("3: (Label: Allow), (Role: A)\n\n7. (Label: Deny), (Role: B)\n");
    ASSERT_EQ(r.policy.size(), 2u);
    EXPECT_EQ(r.policy.rules()[0].index, 1u);
    EXPECT_EQ(r.policy.rules()[1].index, 2u);
    EXPECT_EQ(r.rule_lines, (std::vector<std::size_t>{1, 3}));
    ASSERT_EQ(r.diagnostics.size(), 2u);
    EXPECT_EQ(r.diagnostics[0].line_number, 1u);
    EXPECT_EQ(r.diagnostics[1].line_number, 3u);
}

TEST(ParseMesp, UnknownKeyRoutesToUserWithWarning) {
    const auto r = parse_mesp("1: (Label: Allow), (Clearance: High)");
    ASSERT_EQ(r.policy.size(), 1u);
    EXPECT_EQ(r.policy.rules()[0].user_cond.clauses()[0].attribute,
              AttributeRef(AttributeCategory::User, "Clearance"));
    EXPECT_EQ(count_severity(r, Severity::Warning), 1u);
}

TEST(ParseMesp, CustomKeymapRoutesKey) {
    auto km = KeyCategoryMap::defaults();
    km.set("Clearance", AttributeCategory::Object);
    const auto r = parse_mesp("1: (Label: Allow), (Clearance: High)", km);
    EXPECT_EQ(r.policy.rules()[0].object_cond.size(), 1u);
    EXPECT_TRUE(r.diagnostics.empty());
}

TEST(ParseMesp, ConflictingDuplicateIsError) {
    const auto r = parse_mesp("1: (Label: Allow), (Role: A), (Role: B)");
    EXPECT_TRUE(r.policy.empty());
    EXPECT_EQ(r.error_count(), 1u);
}

TEST(ParseMesp, RepeatedIdenticalClauseIsDroppedWithWarning) {
    const auto r = parse_mesp("1: (Label: Allow), (Role: A), (role: A)");
    ASSERT_EQ(r.policy.size(), 1u);
    EXPECT_EQ(r.policy.rules()[0].user_cond.size(), 1u);
    EXPECT_EQ(count_severity(r, Severity::Warning), 1u);
}

TEST(ParseMesp, OperationKeySetsOperation) {
    const auto r = parse_mesp("1: (Label: Deny), (Operation: write), (Day: Monday)");
    ASSERT_EQ(r.policy.size(), 1u);
    EXPECT_EQ(r.policy.rules()[0].operation, "write");
    EXPECT_EQ(r.policy.rules()[0].env_cond.size(), 1u);
}

TEST(ParseMesp, MalformedShapesAreErrors) {
    for (std::string_view bad : {"(Label: Allow)", "1 (Label: Allow)", "1: Label: Allow", "1: (Label Allow)",
                                 "1: (Label: Allow", "1: (: Allow)", "1: (Role: )", "1: (Role: A) (Day: B)"}) {
        const auto r = parse_mesp(bad);
        EXPECT_TRUE(r.policy.empty()) << bad;
        EXPECT_EQ(r.error_count(), 1u) << bad;
        EXPECT_EQ(r.diagnostics[0].line_number, 1u) << bad;
    }
}

TEST(ParseMesp, CrLfLineEndings) {
    const auto r = parse_mesp("1: (Label: Allow), (Role: A)\r\n2: (Label: Deny), (Role: B)\r\n");
    EXPECT_EQ(r.policy.size(), 2u);
    EXPECT_TRUE(r.diagnostics.empty());
}

TEST(SerializeRules, EmptyPolicy) { EXPECT_EQ(serialize_rules(Policy{}), ""); }

TEST(SerializeRules, AppendixLineIsFixedPoint) {
    EXPECT_EQ(serialize_rules(parse_mesp(kAppendixLine).policy), std::string(kAppendixLine) + "\n");
}

TEST(SerializeRules, CanonicalCategoryOrder) {
    const auto r = parse_mesp("1: (Day: Monday), (System: Portal), (Role: Admin), (Label: Deny), (Operation: read)");
    EXPECT_EQ(serialize_rules(r.policy),
              "1: (Label: Deny), (Role: Admin), (System: Portal), (Day: Monday), (Operation: read)\n");
}

TEST(MespProperties, RoundTripRandomPolicies) {
    std::mt19937 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const auto p = lmn::testing::random_policy(rng);
        const auto text = serialize_rules(p);
        const auto r = parse_mesp(text);
        ASSERT_EQ(r.error_count(), 0u) << text;
        ASSERT_TRUE(r.diagnostics.empty()) << text;
        ASSERT_EQ(r.policy, p) << text;
    }
}

TEST(MespProperties, CanonicalizationIsIdempotent) {
    std::mt19937 rng(99);
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        const int lines = std::uniform_int_distribution<int>(0, 6)(rng);
        for (int l = 0; l < lines; ++l) {
            if (std::bernoulli_distribution(0.5)(rng))
                text += lmn::testing::random_utf8_line(rng);
            else {
                const auto policy = lmn::testing::random_policy(rng, 1);
                text += serialize_rule(policy.rules().empty() ? Rule{} : policy.rules()[0]);
            }
            text += '\n';
        }
        const auto once = serialize_rules(parse_mesp(text).policy);
        const auto twice = serialize_rules(parse_mesp(once).policy);
        ASSERT_EQ(once, twice) << text;
    }
}

TEST(MespProperties, FuzzNeverAbortsAndErrorsCarryLineNumbers) {
    std::mt19937 rng(12345);
    std::string text;
    for (int i = 0; i < 10000; ++i) {
        text += lmn::testing::random_utf8_line(rng);
        text += '\n';
    }
    ParseResult r;
    ASSERT_NO_THROW(r = parse_mesp(text));
    const auto n_lines = text::split_lines(text).size();
    for (const auto& d : r.diagnostics) {
        ASSERT_GE(d.line_number, 1u);
        ASSERT_LE(d.line_number, n_lines);
    }
    for (std::size_t i = 0; i < r.policy.size(); ++i) ASSERT_EQ(r.policy.rules()[i].index, i + 1);
}

TEST(MespProperties, ErrorLinesNeverBecomeRules) {
    std::mt19937 rng(5);
    for (int i = 0; i < 500; ++i) {
        std::string text;
        for (int l = 0; l < 8; ++l) text += lmn::testing::random_utf8_line(rng, 30) + "\n";
        const auto r = parse_mesp(text);
        for (const auto& d : r.diagnostics)
            if (d.severity == Severity::Error) {
                ASSERT_EQ(std::count(r.rule_lines.begin(), r.rule_lines.end(), d.line_number), 0);
            }
    }
}

TEST(MespProperties, SelfVocabularyValidatesClean) {
    std::mt19937 rng(17);
    for (int i = 0; i < 500; ++i) {
        const auto p = lmn::testing::random_policy(rng);
        ASSERT_TRUE(validate_rules(p, vocabulary_from_rules(p)).ok());
    }
}

TEST(AttributesFile, ValueListsAndDefaultCategories) {
    const auto r = parse_attributes_file("Role: Professor, Student\nDay: Monday");
    EXPECT_TRUE(r.diagnostics.empty());
    ASSERT_EQ(r.vocabulary.size(), 2u);
    EXPECT_EQ(r.vocabulary.entries()[0].attribute, AttributeRef(AttributeCategory::User, "Role"));
    EXPECT_EQ(r.vocabulary.entries()[0].allowed_values, (std::set<std::string>{"Professor", "Student"}));
    EXPECT_EQ(r.vocabulary.entries()[1].attribute, AttributeRef(AttributeCategory::Environment, "Day"));
    EXPECT_EQ(r.vocabulary.entries()[1].allowed_values.size(), 1u);
}

TEST(AttributesFile, EmptyInput) { EXPECT_TRUE(parse_attributes_file("").vocabulary.empty()); }

TEST(AttributesFile, CommentAndPrefix) {
    const auto r = parse_attributes_file("# comment\nobject.System");
    ASSERT_EQ(r.vocabulary.size(), 1u);
    EXPECT_EQ(r.vocabulary.entries()[0].attribute, AttributeRef(AttributeCategory::Object, "System"));
    EXPECT_TRUE(r.vocabulary.entries()[0].allowed_values.empty());
}

TEST(AttributesFile, EmptyNameIsErrorAndSkipped) {
    const auto r = parse_attributes_file("Role: A\n: B\nuser.: C");
    EXPECT_EQ(r.vocabulary.size(), 1u);
    ASSERT_EQ(r.diagnostics.size(), 2u);
    EXPECT_EQ(r.diagnostics[0].line_number, 2u);
    EXPECT_EQ(r.diagnostics[1].line_number, 3u);
    EXPECT_EQ(r.diagnostics[0].severity, Severity::Error);
}

TEST(AttributesFile, DuplicateNamesMerge) {
    const auto r = parse_attributes_file("Role: A\nrole: B\nenv.Role: C");
    ASSERT_EQ(r.vocabulary.size(), 1u);
    EXPECT_EQ(r.vocabulary.entries()[0].attribute.category(), AttributeCategory::User);
    EXPECT_EQ(r.vocabulary.entries()[0].allowed_values, (std::set<std::string>{"A", "B", "C"}));
}

TEST(AttributesFile, ParenthesizedForm) {
    const auto r = parse_attributes_file("(Role: Professor, Student)\n(System: Portal)");
    ASSERT_EQ(r.vocabulary.size(), 2u);
    EXPECT_EQ(r.vocabulary.entries()[1].attribute, AttributeRef(AttributeCategory::Object, "System"));
}

TEST(AttributesFile, SerializeRoundTrip) {
    AttributeVocabulary v;
    v.add(AttributeRef(AttributeCategory::User, "Role"), {"Professor", "Student"});
    v.add(AttributeRef(AttributeCategory::Environment, "Clearance"), {"High"});
    v.add(AttributeRef(AttributeCategory::Object, "System"));
    v.add(AttributeRef(AttributeCategory::Object, "Day"), {"Monday"});
    const auto text = serialize_vocabulary(v);
    EXPECT_EQ(text, "Role: Professor, Student\nenv.Clearance: High\nSystem\nobject.Day: Monday\n");
    EXPECT_EQ(parse_attributes_file(text).vocabulary, v);
}

TEST(Validate, ConformantRulesGiveEmptyReport) {
    const auto vocab = parse_attributes_file("Role: Professor, Student\nSystem").vocabulary;
    const auto p = parse_mesp("1: (Label: Allow), (Role: Student), (System: Anything)").policy;
    EXPECT_TRUE(validate_rules(p, vocab).ok());
}

TEST(Validate, ValueOutsideAllowedSet) {
    const auto vocab = parse_attributes_file("Role: Professor, Student").vocabulary;
    const auto report = validate_rules(parse_mesp("1: (Label: Allow), (Role: Hacker)").policy, vocab);
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.count(ViolationKind::ValueNotAllowed), 1u);
    EXPECT_EQ(report.violations[0].value, "Hacker");
}

TEST(Validate, UnknownAttribute) {
    const auto vocab = parse_attributes_file("Role: Professor, Student").vocabulary;
    const auto report = validate_rules(parse_mesp("1: (Label: Allow), (Clearance: High)").policy, vocab);
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.count(ViolationKind::UnknownAttribute), 1u);
    EXPECT_EQ(report.violations[0].attribute, "Clearance");
}
