// Three-valued logic for predicates decided over balls: a property can hold
// for every point of the input balls, fail for every point, or depend on
// which points are picked, in which case the verdict is indeterminate and the
// caller may retry at higher precision.

#pragma once

namespace ctheta {

enum class Tristate {
    kFalse,
    kTrue,
    kIndeterminate,
};

inline bool is_true(Tristate t) { return t == Tristate::kTrue; }
inline bool is_false(Tristate t) { return t == Tristate::kFalse; }
inline bool is_indeterminate(Tristate t) { return t == Tristate::kIndeterminate; }

}  // namespace ctheta
