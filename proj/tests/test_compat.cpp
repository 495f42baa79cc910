#include "doctest.h"

#include <random>

#include "agentaudit/compat.hpp"

using namespace agentaudit;

namespace {

TypeSignature t(const char* text) { return TypeSignature::parse(text); }

} // namespace

TEST_CASE("the three dependency-rule examples classify as stated") {
    CHECK(types_compatible(t("str"), t("str")) == CompatKind::Equivalence);
    CHECK(types_compatible(t("str"), t("list[str]")) == CompatKind::SubsetReturnInInput);
    CHECK(types_compatible(t("list[str]"), t("str")) == CompatKind::SubsetInputInReturn);
    CHECK(types_compatible(t("jsonstr"), t("map[str,str]")) == CompatKind::Conversion);
    CHECK(types_compatible(t("int"), t("bool")) == std::nullopt);
}

TEST_CASE("subset recurses through containers and object members") {
    TypeSignature record = TypeSignature::object(
        "Record", {{"rows", t("list[str]")}, {"meta", t("map[str,int]")}});

    CHECK(types_compatible(t("str"), record) == CompatKind::SubsetReturnInInput);
    CHECK(types_compatible(record, t("int")) == CompatKind::SubsetInputInReturn);
    CHECK(types_compatible(t("str"), t("list[list[str]]")) == CompatKind::SubsetReturnInInput);
    CHECK(types_compatible(t("str"), t("map[int,str]")) == CompatKind::SubsetReturnInInput);
    // Map keys are not handed over as values.
    CHECK(types_compatible(t("int"), t("map[int,str]")) == std::nullopt);
    CHECK(types_compatible(t("str"), t("optional[str]")) == CompatKind::SubsetReturnInInput);
}

TEST_CASE("conversion covers serialized payloads both ways") {
    TypeSignature obj = TypeSignature::object("Cfg", {{"k", t("str")}});
    CHECK(types_compatible(t("jsonstr"), obj) == CompatKind::Conversion);
    CHECK(types_compatible(obj, t("jsonstr")) == CompatKind::Conversion);
    CHECK(types_compatible(t("map[str,str]"), t("jsonstr[map[str,str]]")) ==
          CompatKind::Conversion);
    // A plain string is not a serialized payload: no conversion into an
    // object without string members.
    TypeSignature ints = TypeSignature::object("Counts", {{"n", t("int")}});
    CHECK(types_compatible(t("str"), ints) == std::nullopt);
    CHECK(types_compatible(t("jsonstr"), ints) == CompatKind::Conversion);
}

TEST_CASE("reflexivity: every signature is equivalent to itself") {
    const char* specimens[] = {"str",
                               "int",
                               "list[str]",
                               "map[str,list[int]]",
                               "optional[bool]",
                               "jsonstr[map[str,str]]",
                               "object:X",
                               "customtype"};
    for (const char* text : specimens) {
        CHECK(types_compatible(t(text), t(text)) == CompatKind::Equivalence);
    }
}

TEST_CASE("random signatures classify to at most one kind, deterministically") {
    std::mt19937 rng(7);
    auto random_sig = [&](auto&& self, int depth) -> TypeSignature {
        int pick = static_cast<int>(rng() % (depth > 2 ? 4 : 7));
        switch (pick) {
        case 0: return t("str");
        case 1: return t("int");
        case 2: return t("bool");
        case 3: return t("custom");
        case 4: return TypeSignature::list(self(self, depth + 1));
        case 5: return TypeSignature::map(t("str"), self(self, depth + 1));
        default:
            return TypeSignature::object("O" + std::to_string(rng() % 3),
                                         {{"a", self(self, depth + 1)}});
        }
    };
    for (int i = 0; i < 200; ++i) {
        TypeSignature ret = random_sig(random_sig, 0);
        TypeSignature inp = random_sig(random_sig, 0);
        auto first = types_compatible(ret, inp);
        CHECK(types_compatible(ret, inp) == first);
        if (ret == inp) CHECK(first == CompatKind::Equivalence);
    }
}
