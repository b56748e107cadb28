// Copyright 2026 The auditstat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "auditstat/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <iterator>

#include "auditstat/error.hpp"

namespace auditstat {
namespace {

const char* const kRequired[] = {"product_id", "reviewer_id", "question_id", "answer",
                                 "final_classification"};

[[noreturn]] void row_error(std::size_t line, const std::string& msg) {
  fail(ErrorCode::bad_value, "row " + std::to_string(line) + ": " + msg);
}

std::int64_t parse_period(const std::string& text, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    row_error(line, "period '" + text + "' is not an integer");
  }
  return v;
}

double parse_outcome(const std::string& text, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    row_error(line, "outcome '" + text + "' is not a number");
  }
  return v;
}

DidGroup parse_group(const std::string& text, std::size_t line) {
  if (text == "treated") return DidGroup::treated;
  if (text == "control") return DidGroup::control;
  row_error(line, "group '" + text + "' is neither treated nor control");
}

std::vector<ReviewRecord> records_of(const CsvTable& t, bool need_period) {
  std::size_t idx[5];
  for (int i = 0; i < 5; ++i) idx[i] = t.column(kRequired[i]);
  const auto team = t.find("team");
  const auto period = need_period ? std::optional(t.column("period")) : t.find("period");
  std::vector<ReviewRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    ReviewRecord rec{row[idx[0]], row[idx[1]], row[idx[2]], row[idx[3]], row[idx[4]], {}, {}};
    if (team && !row[*team].empty()) rec.team = row[*team];
    if (period && (need_period || !row[*period].empty())) {
      rec.period = parse_period(row[*period], t.lines[r]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void put_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

std::optional<std::size_t> CsvTable::find(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::column(const std::string& name) const {
  auto i = find(name);
  if (!i) fail(ErrorCode::missing_column, "missing required column '" + name + "'");
  return *i;
}

CsvTable read_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::size_t pos = text.rfind("\xEF\xBB\xBF", 0) == 0 ? 3 : 0;

  CsvTable t;
  std::size_t line = 1;
  bool have_header = false;
  while (pos < text.size()) {
    const std::size_t start_line = line;
    std::vector<std::string> fields(1);
    bool quoted = false, ended = false;
    while (pos < text.size() && !ended) {
      const char ch = text[pos++];
      if (quoted) {
        if (ch == '"') {
          if (pos < text.size() && text[pos] == '"') {
            fields.back() += '"';
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line;
          fields.back() += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        fields.emplace_back();
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
        ++line;
        ended = true;
      } else {
        fields.back() += ch;
      }
    }
    if (quoted) row_error(start_line, "unterminated quoted field");
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size()) {
        row_error(start_line, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
      }
      t.rows.push_back(std::move(fields));
      t.lines.push_back(start_line);
    }
  }
  if (!have_header) fail(ErrorCode::empty_input, "CSV input is empty");
  return t;
}

std::vector<ReviewRecord> ingest_csv(std::istream& in) { return records_of(read_csv(in), false); }

std::vector<ReviewRecord> ingest_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::invalid_argument, "cannot open '" + path + "'");
  return ingest_csv(in);
}

namespace {

void write_rows(std::ostream& out, const std::vector<ReviewRecord>& records, bool team,
                bool period, const char* group) {
  for (const auto& r : records) {
    for (const auto* f : {&r.product_id, &r.reviewer_id, &r.question_id, &r.answer}) {
      put_field(out, *f);
      out << ',';
    }
    put_field(out, r.final_classification);
    if (team) {
      out << ',';
      if (r.team) put_field(out, *r.team);
    }
    if (period) {
      out << ',';
      if (r.period) out << *r.period;
    }
    if (group) out << ',' << group;
    out << '\n';
  }
}

void write_header(std::ostream& out, bool team, bool period, bool group) {
  out << "product_id,reviewer_id,question_id,answer,final_classification";
  if (team) out << ",team";
  if (period) out << ",period";
  if (group) out << ",group";
  out << '\n';
}

void scan(const std::vector<ReviewRecord>& records, bool& team, bool& period) {
  for (const auto& r : records) {
    team = team || r.team.has_value();
    period = period || r.period.has_value();
  }
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ReviewRecord>& records) {
  bool team = false, period = false;
  scan(records, team, period);
  write_header(out, team, period, false);
  write_rows(out, records, team, period, nullptr);
}

void write_grouped_csv(std::ostream& out, const GroupedReviews& reviews) {
  bool team = false, period = false;
  scan(reviews.treated, team, period);
  scan(reviews.control, team, period);
  write_header(out, team, period, true);
  write_rows(out, reviews.treated, team, period, "treated");
  write_rows(out, reviews.control, team, period, "control");
}

void write_ground_truth(std::ostream& out, const std::map<std::string, std::string>& truth) {
  out << "product_id,ground_truth\n";
  for (const auto& [product, label] : truth) {
    put_field(out, product);
    out << ',';
    put_field(out, label);
    out << '\n';
  }
}

std::map<std::string, std::string> ingest_ground_truth(std::istream& in) {
  const auto t = read_csv(in);
  const auto product = t.column("product_id"), truth = t.column("ground_truth");
  std::map<std::string, std::string> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row[product].empty()) row_error(t.lines[r], "empty product_id");
    auto [it, inserted] = out.emplace(row[product], row[truth]);
    if (!inserted && it->second != row[truth]) {
      row_error(t.lines[r], "conflicting ground truth for product " + row[product]);
    }
  }
  return out;
}

DidPanel ingest_did_panel(std::istream& in, std::int64_t change_period) {
  const auto t = read_csv(in);
  const auto group = t.column("group"), period = t.column("period"), outcome = t.column("outcome");
  DidPanel p;
  p.change_period = change_period;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    p.observations.push_back({parse_group(row[group], t.lines[r]),
                              parse_period(row[period], t.lines[r]),
                              parse_outcome(row[outcome], t.lines[r])});
  }
  return p;
}

GroupedReviews ingest_grouped_reviews(std::istream& in) {
  const auto t = read_csv(in);
  const auto group = t.column("group");
  auto records = records_of(t, true);
  GroupedReviews out;
  for (std::size_t r = 0; r < records.size(); ++r) {
    auto& dst = parse_group(t.rows[r][group], t.lines[r]) == DidGroup::treated ? out.treated
                                                                               : out.control;
    dst.push_back(std::move(records[r]));
  }
  return out;
}

}  // namespace auditstat
