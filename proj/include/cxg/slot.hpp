#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cxg/annotate.hpp"
#include "cxg/corpus.hpp"

namespace cxg {

// Representation layer a slot constrains. Order (LEX < SYN < SEM) is the
// canonical kind order used for tie-breaking and serialization.
enum class SlotKind : std::uint8_t { lex = 0, syn = 1, sem = 2 };

inline constexpr int kSlotKindCount = 3;

inline std::string_view to_string(SlotKind k) {
    switch (k) {
        case SlotKind::lex: return "LEX";
        case SlotKind::syn: return "SYN";
        case SlotKind::sem: return "SEM";
    }
    return "?";
}

inline std::optional<SlotKind> parse_slot_kind(std::string_view s) {
    if (s == "LEX") return SlotKind::lex;
    if (s == "SYN") return SlotKind::syn;
    if (s == "SEM") return SlotKind::sem;
    return std::nullopt;
}

// One slot of a construction: a constraint over one layer. value holds the
// word form (LEX), the UPOS tag name (SYN), or the decimal cluster id (SEM).
struct SlotConstraint {
    SlotKind kind = SlotKind::lex;
    std::string value;

    auto operator<=>(const SlotConstraint&) const = default;
};

inline SlotConstraint slot_lex(std::string_view word) {
    return {SlotKind::lex, std::string(word)};
}
inline SlotConstraint slot_syn(Upos tag) {
    return {SlotKind::syn, std::string(to_string(tag))};
}
inline SlotConstraint slot_sem(std::int32_t cluster) {
    return {SlotKind::sem, std::to_string(cluster)};
}

inline std::optional<std::int32_t> parse_sem_value(std::string_view s) {
    std::int32_t v = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end || v < 0) return std::nullopt;
    return v;
}

// Whether one token satisfies the constraint. SEM never matches a token
// outside the semantic lexicon (sem == -1).
inline bool matches(const SlotConstraint& slot, const AnnotatedToken& token) {
    switch (slot.kind) {
        case SlotKind::lex: return token.lex == slot.value;
        case SlotKind::syn: return to_string(token.syn) == slot.value;
        case SlotKind::sem: {
            if (token.sem < 0) return false;
            auto v = parse_sem_value(slot.value);
            return v && *v == token.sem;
        }
    }
    return false;
}

}  // namespace cxg
