#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace newshub {

// Binary veracity label. fake = 1, real = 0.
enum class Label : std::uint8_t { real = 0, fake = 1 };

constexpr int to_int(Label l) noexcept { return static_cast<int>(l); }

// Throws Error(Errc::input) for anything other than 0 or 1.
Label label_from_int(long long v);

std::vector<Label> labels_from_ints(std::span<const int> values);
std::vector<int> labels_to_ints(std::span<const Label> labels);

constexpr Label flip(Label l) noexcept {
  return l == Label::fake ? Label::real : Label::fake;
}

}  // namespace newshub
