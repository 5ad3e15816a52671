#include "json_lines.hpp"

namespace belllab::cli {

std::string escape_pointer_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

JsonLineIndex::JsonLineIndex(std::string_view text) : text_(text) {
  skip_ws();
  if (pos_ < text_.size()) value("");
}

int JsonLineIndex::line_of(std::string pointer) const {
  for (;;) {
    if (auto it = lines_.find(pointer); it != lines_.end()) return it->second;
    if (pointer.empty()) return 0;
    pointer.erase(pointer.rfind('/'));
  }
}

void JsonLineIndex::skip_ws() {
  while (pos_ < text_.size()) {
    const char c = text_[pos_];
    if (c == '\n') ++line_;
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') break;
    ++pos_;
  }
}

std::string JsonLineIndex::string_token() {
  std::string out;
  ++pos_;  // opening quote
  while (pos_ < text_.size() && text_[pos_] != '"') {
    if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
      out += text_[pos_ + 1];
      pos_ += 2;
      continue;
    }
    out += text_[pos_++];
  }
  ++pos_;  // closing quote
  return out;
}

void JsonLineIndex::value(const std::string& pointer) {
  lines_.emplace(pointer, line_);
  const char c = peek();
  if (c == '{') {
    ++pos_;
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return;
    }
    while (pos_ < text_.size()) {
      skip_ws();
      if (peek() != '"') return;
      const std::string key = string_token();
      skip_ws();
      if (peek() != ':') return;
      ++pos_;
      skip_ws();
      value(pointer + "/" + escape_pointer_token(key));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == '}') ++pos_;
      return;
    }
  } else if (c == '[') {
    ++pos_;
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return;
    }
    for (std::size_t i = 0; pos_ < text_.size(); ++i) {
      skip_ws();
      value(pointer + "/" + std::to_string(i));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') ++pos_;
      return;
    }
  } else if (c == '"') {
    string_token();
  } else {
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (d == ',' || d == '}' || d == ']' || d == ' ' || d == '\n' || d == '\t' || d == '\r') break;
      ++pos_;
    }
  }
}

}  // namespace belllab::cli
