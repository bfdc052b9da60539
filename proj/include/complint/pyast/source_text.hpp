// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

namespace complint {

/// Python source held as UTF-8 text. Stored byte-exactly; normalization for
/// tokenizing happens inside the lexer and never touches this buffer.
class SourceText {
 public:
  SourceText() = default;
  explicit SourceText(std::string text) : text_(std::move(text)) {}

  const std::string& text() const noexcept { return text_; }
  std::string_view view() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }

  /// 1 + number of newline characters.
  std::size_t line_count() const noexcept {
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.end(), '\n'));
  }

  friend bool operator==(const SourceText&, const SourceText&) = default;

 private:
  std::string text_;
};

/// Checks that `bytes` is well-formed UTF-8 (no overlongs, no surrogates).
bool is_valid_utf8(std::string_view bytes) noexcept;

}  // namespace complint
