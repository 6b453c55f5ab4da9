// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "refverify/bench.hpp"

namespace refverify {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kIo, "bad number in report: '" + s + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& s) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kIo, "bad integer in report: '" + s + "'");
  }
  return v;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

std::string join_acceptance(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> split_acceptance(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto end = text.find(';', start);
    out.push_back(parse_double(text.substr(start, end - start)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

nlohmann::ordered_json to_json(const ReportRow& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["cell_index"] = r.cell_index;
  j["alpha"] = r.alpha;
  j["gamma"] = r.gamma;
  j["strategy"] = r.strategy;
  j["eta"] = r.eta;
  j["template"] = r.template_name;
  j["seed"] = r.seed;
  j["mat"] = r.mat;
  j["acceptance_by_position"] = r.acceptance_by_position;
  j["tokens_per_second"] = include_timing ? r.tokens_per_second : 0.0;
  j["output_tokens"] = r.output_tokens;
  j["target_forwards"] = r.target_forwards;
  j["input_budget_per_step"] = r.input_budget_per_step;
  j["error"] = r.error;
  return j;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "cell_index",    "alpha",           "gamma",
      "strategy",      "eta",             "template",
      "seed",          "mat",             "acceptance_by_position",
      "tokens_per_second", "output_tokens", "target_forwards",
      "input_budget_per_step", "error"};
  return columns;
}

void write_report(std::ostream& out, const std::vector<ReportRow>& rows,
                  ReportFormat format, bool include_timing) {
  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) arr.push_back(to_json(r, include_timing));
    out << arr.dump(2) << '\n';
    return;
  }
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << cols[i];
  }
  out << '\n';
  for (const auto& r : rows) {
    out << r.cell_index << ',' << format_double(r.alpha) << ',' << r.gamma
        << ',' << csv_escape(r.strategy) << ',' << format_double(r.eta) << ','
        << csv_escape(r.template_name) << ',' << r.seed << ','
        << format_double(r.mat) << ','
        << join_acceptance(r.acceptance_by_position) << ','
        << format_double(include_timing ? r.tokens_per_second : 0.0) << ','
        << r.output_tokens << ',' << r.target_forwards << ','
        << format_double(r.input_budget_per_step) << ','
        << csv_escape(r.error) << '\n';
  }
}

void emit_report(const std::string& path, const std::vector<ReportRow>& rows,
                 ReportFormat format, bool include_timing) {
  if (rows.empty()) throw Error(ErrorKind::kInvalidConfig, "no rows to emit");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  write_report(out, rows, format, include_timing);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

std::vector<ReportRow> parse_json_report(const std::string& text) {
  std::vector<ReportRow> rows;
  try {
    for (const auto& j : nlohmann::json::parse(text)) {
      ReportRow r;
      r.cell_index = j.at("cell_index").get<std::size_t>();
      r.alpha = j.at("alpha").get<double>();
      r.gamma = j.at("gamma").get<std::size_t>();
      r.strategy = j.at("strategy").get<std::string>();
      r.eta = j.at("eta").get<double>();
      r.template_name = j.at("template").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.mat = j.at("mat").get<double>();
      r.acceptance_by_position =
          j.at("acceptance_by_position").get<std::vector<double>>();
      r.tokens_per_second = j.at("tokens_per_second").get<double>();
      r.output_tokens = j.at("output_tokens").get<std::size_t>();
      r.target_forwards = j.at("target_forwards").get<std::size_t>();
      r.input_budget_per_step = j.at("input_budget_per_step").get<double>();
      r.error = j.at("error").get<std::string>();
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("malformed JSON report: ") + e.what());
  }
  return rows;
}

std::vector<ReportRow> parse_csv_report(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || csv_split(line) != csv_columns()) {
    throw Error(ErrorKind::kIo, "CSV header does not match the report schema");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != csv_columns().size()) {
      throw Error(ErrorKind::kIo, "CSV row has the wrong number of fields");
    }
    ReportRow r;
    r.cell_index = parse_int<std::size_t>(f[0]);
    r.alpha = parse_double(f[1]);
    r.gamma = parse_int<std::size_t>(f[2]);
    r.strategy = f[3];
    r.eta = parse_double(f[4]);
    r.template_name = f[5];
    r.seed = parse_int<std::uint64_t>(f[6]);
    r.mat = parse_double(f[7]);
    r.acceptance_by_position = split_acceptance(f[8]);
    r.tokens_per_second = parse_double(f[9]);
    r.output_tokens = parse_int<std::size_t>(f[10]);
    r.target_forwards = parse_int<std::size_t>(f[11]);
    r.input_budget_per_step = parse_double(f[12]);
    r.error = f[13];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace refverify
