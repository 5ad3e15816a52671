#pragma once

#include <map>
#include <string>
#include <string_view>

namespace belllab::cli {

/// Maps JSON pointers ("/source/jitter_sd") to the 1-based line where the
/// value starts.  Expects text that already parsed as JSON; on anything
/// unexpected the index is simply left incomplete.
class JsonLineIndex {
 public:
  explicit JsonLineIndex(std::string_view text);

  /// Line of the pointer, or of its nearest indexed ancestor; 0 if unknown.
  int line_of(std::string pointer) const;

 private:
  void value(const std::string& pointer);
  void skip_ws();
  std::string string_token();
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

std::string escape_pointer_token(const std::string& key);

}  // namespace belllab::cli
