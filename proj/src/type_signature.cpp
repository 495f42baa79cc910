#include "agentaudit/type_signature.hpp"

#include <algorithm>
#include <cctype>

#include "agentaudit/errors.hpp"

namespace agentaudit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits "K, V" at the top-level comma, respecting nested brackets.
std::vector<std::string_view> split_top_level(std::string_view s) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '[') ++depth;
        else if (s[i] == ']') --depth;
        else if (s[i] == ',' && depth == 0) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(s.substr(start));
    return parts;
}

// Returns the bracket argument of "head[...]" or empty when absent.
bool extract_bracket(std::string_view s, std::string_view head, std::string_view& arg) {
    if (s.size() <= head.size() || s.substr(0, head.size()) != head) return false;
    std::string_view rest = trim(s.substr(head.size()));
    if (rest.empty() || rest.front() != '[' || rest.back() != ']') return false;
    arg = rest.substr(1, rest.size() - 2);
    return true;
}

bool valid_bare_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
              c == '.')) {
            return false;
        }
    }
    return true;
}

} // namespace

TypeSignature TypeSignature::primitive(std::string name) {
    return TypeSignature(Kind::Primitive, std::move(name));
}

TypeSignature TypeSignature::list(TypeSignature element) {
    TypeSignature t(Kind::List, "");
    t.children_.push_back(std::make_shared<const TypeSignature>(std::move(element)));
    return t;
}

TypeSignature TypeSignature::map(TypeSignature key, TypeSignature value) {
    TypeSignature t(Kind::Map, "");
    t.children_.push_back(std::make_shared<const TypeSignature>(std::move(key)));
    t.children_.push_back(std::make_shared<const TypeSignature>(std::move(value)));
    return t;
}

TypeSignature TypeSignature::object(std::string type_name,
                                    std::vector<std::pair<std::string, TypeSignature>> members) {
    TypeSignature t(Kind::Object, std::move(type_name));
    for (auto& [name, type] : members) {
        t.member_names_.push_back(name);
        t.children_.push_back(std::make_shared<const TypeSignature>(std::move(type)));
    }
    return t;
}

TypeSignature TypeSignature::optional(TypeSignature inner) {
    if (inner.kind_ == Kind::Optional) return inner;
    TypeSignature t(Kind::Optional, "");
    t.children_.push_back(std::make_shared<const TypeSignature>(std::move(inner)));
    return t;
}

TypeSignature TypeSignature::serialized() {
    return TypeSignature(Kind::Serialized, "");
}

TypeSignature TypeSignature::serialized(TypeSignature hint) {
    TypeSignature t(Kind::Serialized, "");
    t.children_.push_back(std::make_shared<const TypeSignature>(std::move(hint)));
    return t;
}

const TypeSignature& TypeSignature::element() const { return *children_.at(0); }
const TypeSignature& TypeSignature::key() const { return *children_.at(0); }
const TypeSignature& TypeSignature::value() const { return *children_.at(1); }
const TypeSignature& TypeSignature::inner() const { return *children_.at(0); }
bool TypeSignature::has_hint() const { return kind_ == Kind::Serialized && !children_.empty(); }
const TypeSignature& TypeSignature::hint() const { return *children_.at(0); }

TypeSignature TypeSignature::parse(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) fail(ErrorCode::MalformedManifest, "empty type string");

    std::string_view arg;
    if (extract_bracket(s, "list", arg)) return list(parse(arg));
    if (extract_bracket(s, "optional", arg)) return optional(parse(arg));
    if (extract_bracket(s, "jsonstr", arg)) return serialized(parse(arg));
    if (extract_bracket(s, "map", arg)) {
        auto parts = split_top_level(arg);
        if (parts.size() != 2)
            fail(ErrorCode::MalformedManifest, "map needs two type arguments: " + std::string(s));
        return map(parse(parts[0]), parse(parts[1]));
    }
    if (s == "list") return list(primitive("unknown"));
    if (s == "map") return map(primitive("unknown"), primitive("unknown"));
    if (s == "optional") return optional(primitive("unknown"));
    if (s == "jsonstr") return serialized();
    if (s.substr(0, 7) == "object:") {
        std::string_view name = trim(s.substr(7));
        if (!valid_bare_name(name))
            fail(ErrorCode::MalformedManifest, "bad object name in: " + std::string(s));
        return object(std::string(name), {});
    }
    if (!valid_bare_name(s))
        fail(ErrorCode::MalformedManifest, "unparseable type string: " + std::string(s));
    return primitive(std::string(s));
}

bool TypeSignature::operator==(const TypeSignature& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
    case Kind::Primitive:
        return name_ == other.name_;
    case Kind::List:
    case Kind::Optional:
        return element() == other.element();
    case Kind::Map:
        return key() == other.key() && value() == other.value();
    case Kind::Serialized:
        if (has_hint() != other.has_hint()) return false;
        return !has_hint() || hint() == other.hint();
    case Kind::Object: {
        if (name_ != other.name_ || member_count() != other.member_count()) return false;
        // Compare as sorted (name, type) pairs so declaration order is irrelevant.
        std::vector<std::size_t> a(member_count()), b(member_count());
        for (std::size_t i = 0; i < member_count(); ++i) a[i] = b[i] = i;
        auto by_name = [](const TypeSignature& t) {
            return [&t](std::size_t x, std::size_t y) {
                return t.member_names_[x] < t.member_names_[y];
            };
        };
        std::sort(a.begin(), a.end(), by_name(*this));
        std::sort(b.begin(), b.end(), by_name(other));
        for (std::size_t i = 0; i < member_count(); ++i) {
            if (member_names_[a[i]] != other.member_names_[b[i]]) return false;
            if (!(member_type(a[i]) == other.member_type(b[i]))) return false;
        }
        return true;
    }
    }
    return false;
}

std::string TypeSignature::to_string() const {
    switch (kind_) {
    case Kind::Primitive:
        return name_;
    case Kind::List:
        return "list[" + element().to_string() + "]";
    case Kind::Map:
        return "map[" + key().to_string() + "," + value().to_string() + "]";
    case Kind::Optional:
        return "optional[" + inner().to_string() + "]";
    case Kind::Serialized:
        return has_hint() ? "jsonstr[" + hint().to_string() + "]" : "jsonstr";
    case Kind::Object:
        return "object:" + name_;
    }
    return "";
}

} // namespace agentaudit
