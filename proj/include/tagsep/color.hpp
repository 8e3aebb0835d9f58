#pragma once

#include <cstdint>
#include <string_view>

namespace tagsep {

// White: unrevealed Bernoulli site. Blue: revealed, holds an environment
// particle. Purple: revealed, vacant.
enum class Color : std::uint8_t { White = 0, Blue = 1, Purple = 2 };

constexpr std::string_view to_string(Color c) {
  switch (c) {
    case Color::White: return "white";
    case Color::Blue: return "blue";
    case Color::Purple: return "purple";
  }
  return "?";
}

constexpr int color_index(Color c) { return static_cast<int>(c); }

}  // namespace tagsep
