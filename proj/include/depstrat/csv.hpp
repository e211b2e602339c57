/*
 * Copyright 2026 The depstrat Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depstrat/error.hpp"

namespace depstrat {

// Streaming RFC 4180 reader. Quoted fields may contain separators, doubled
// quotes and line breaks. With `skip_comments`, records whose first character
// is '#' are skipped (used for provenance lines in our own outputs).
class CsvReader {
 public:
  explicit CsvReader(std::istream& in, bool skip_comments = false)
      : in_(in), skip_comments_(skip_comments) {}

  // Reads the next record into `fields`. Returns false at end of input.
  bool next(std::vector<std::string>& fields) {
    for (;;) {
      fields.clear();
      if (in_.peek() == std::char_traits<char>::eof()) return false;
      if (skip_comments_ && in_.peek() == '#') {
        std::string ignored;
        std::getline(in_, ignored);
        ++line_;
        continue;
      }
      read_record(fields);
      if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
      return true;
    }
  }

  std::size_t line() const { return line_; }

 private:
  void read_record(std::vector<std::string>& fields) {
    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    ++line_;
    for (;;) {
      const int ch = in_.get();
      if (ch == std::char_traits<char>::eof()) {
        fields.push_back(std::move(field));
        return;
      }
      const char c = static_cast<char>(ch);
      if (quoted) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && field.empty() && !field_started_quoted) {
        quoted = true;
        field_started_quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
      } else if (c == '\n') {
        fields.push_back(std::move(field));
        return;
      } else if (c == '\r') {
        if (in_.peek() == '\n') continue;
        field.push_back(c);
      } else {
        field.push_back(c);
      }
    }
  }

  std::istream& in_;
  bool skip_comments_;
  std::size_t line_ = 0;
};

// Maps header names to column positions.
class CsvHeader {
 public:
  CsvHeader() = default;
  explicit CsvHeader(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::string name = names[i];
      // Tolerate a UTF-8 byte order mark on the first column.
      if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
      index_.emplace(name, i);
    }
    size_ = names.size();
  }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require(std::string_view name, std::string_view file) const {
    auto pos = find(name);
    if (!pos) {
      throw Error(ErrorCode::kSchemaMismatch,
                  std::string(file) + ": required column '" + std::string(name) + "' is absent");
    }
    return *pos;
  }

  std::size_t size() const { return size_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t size_ = 0;
};

inline void write_csv_field(std::ostream& out, std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                            (!field.empty() && field.front() == '#');
  if (!needs_quotes) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_csv_field(out, fields[i]);
  }
  out << '\n';
}

// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorCode::kInternal, "double formatting failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kMalformedInput, "not a finite number: '" + std::string(text) + "'");
  }
  return value;
}

inline std::optional<std::int64_t> parse_int(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc() && ptr == text.data() + text.size()) return value;
  // libraries.io occasionally writes integral counts as "12.0".
  double d = 0;
  auto [dptr, dec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (dec == std::errc() && dptr == text.data() + text.size() && std::isfinite(d) &&
      d == std::floor(d) && std::fabs(d) < 9.0e15) {
    return static_cast<std::int64_t>(d);
  }
  return std::nullopt;
}

}  // namespace depstrat
