#include "relprop/value.hpp"

#include <cctype>
#include <cstdio>

namespace relprop {

std::string value_text(const Value& v) {
    switch (v.index()) {
        case 0:
            return "null";
        case 1:
            return std::to_string(std::get<std::int64_t>(v));
        case 2: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(v));
            return buf;
        }
        default:
            return std::get<std::string>(v);
    }
}

std::string canonical_component(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (unsigned char c : raw) {
        if (std::isspace(c) || c == '_') {
            out.push_back('-');
        } else {
            out.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    return out;
}

}  // namespace relprop
