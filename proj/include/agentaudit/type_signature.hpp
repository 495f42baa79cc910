#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agentaudit {

/// Recursive type descriptor for tool parameters and return values.
///
/// Built from the manifest mini-grammar:
///   str | int | float | bool | list[T] | map[K,V] | object:Name | optional[T] | jsonstr[T]
///
/// Unknown bare names parse as primitives carrying that name verbatim, so
/// ad-hoc type vocabularies from real tool markets degrade to name equality
/// instead of being rejected. `jsonstr` models a string that carries
/// structured data (a serialized payload); the bracket argument is an
/// optional hint about what it decodes to. Bare `list` / `map` read as
/// containers of `unknown`.
///
/// Values are immutable; copies share child nodes.
class TypeSignature {
public:
    enum class Kind { Primitive, List, Map, Object, Optional, Serialized };

    static TypeSignature primitive(std::string name);
    static TypeSignature list(TypeSignature element);
    static TypeSignature map(TypeSignature key, TypeSignature value);
    static TypeSignature object(std::string type_name,
                                std::vector<std::pair<std::string, TypeSignature>> members);
    /// optional(optional(x)) collapses to optional(x).
    static TypeSignature optional(TypeSignature inner);
    static TypeSignature serialized();
    static TypeSignature serialized(TypeSignature hint);

    /// Parses one type string of the mini-grammar. `object:Name` yields an
    /// object with no members; manifest loading resolves members afterwards.
    static TypeSignature parse(std::string_view text);

    Kind kind() const { return kind_; }

    /// Primitive name or object type name (empty otherwise).
    const std::string& name() const { return name_; }

    const TypeSignature& element() const;            // list
    const TypeSignature& key() const;                // map
    const TypeSignature& value() const;              // map
    const TypeSignature& inner() const;              // optional
    bool has_hint() const;                           // serialized
    const TypeSignature& hint() const;               // serialized, has_hint() only

    std::size_t member_count() const { return member_names_.size(); }
    const std::string& member_name(std::size_t i) const { return member_names_[i]; }
    const TypeSignature& member_type(std::size_t i) const { return *children_[i]; }

    /// Structural equality; objects compare type name plus the name→type
    /// member mapping (order-insensitive).
    bool operator==(const TypeSignature& other) const;
    bool operator!=(const TypeSignature& other) const { return !(*this == other); }

    /// Renders back to the mini-grammar. parse(to_string()) round-trips.
    std::string to_string() const;

private:
    TypeSignature(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    Kind kind_;
    std::string name_;
    std::vector<std::shared_ptr<const TypeSignature>> children_;
    std::vector<std::string> member_names_;   // parallel to children_ for Kind::Object
};

} // namespace agentaudit
