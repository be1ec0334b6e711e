#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace relprop {

struct Null {
    bool operator==(const Null&) const { return true; }
};

// Cell value: Null, 64-bit integer, 64-bit float, or UTF-8 text.
using Value = std::variant<Null, std::int64_t, double, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<Null>(v); }

// Text form used for keys, class labels and serialization.
std::string value_text(const Value& v);

// Lowercase a component and replace whitespace and '_' with '-' so that
// canonical item strings split unambiguously on '_' and '__'.
std::string canonical_component(std::string_view raw);

}  // namespace relprop
