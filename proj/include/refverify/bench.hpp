// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "refverify/engine.hpp"

namespace refverify {

// Emitted tokens per target forward.
double mean_accepted_tokens(const RunStats& stats);

// |draft1| + |prompt| + |prefix| + |draft2|.
std::size_t input_budget(const ReflectiveLayout& layout);

struct NamedTemplate {
  std::string name;
  ReflectiveTemplate tmpl;
};

/// Cross-product of the grids below, each cell a decode over every prompt.
/// Models are the divergence pair over a table base, with the target wrapped
/// reflection-aware when beta > 0.
struct SweepSpec {
  std::vector<double> alphas{0.3};
  std::vector<std::size_t> gammas{5};
  std::vector<Strategy> strategies{Strategy::kSpeculativeSampling};
  std::vector<double> etas{0.4};
  std::vector<NamedTemplate> templates;
  std::vector<std::uint64_t> seeds{0};
  std::vector<TokenSeq> prompts;

  ModelSpec base_model;
  double beta = 0.5;
  Token marker = 0;
  double temperature = 0.8;
  TypicalConfig typical;
  EntropySource entropy_source = EntropySource::kOriginal;
  std::size_t max_new_tokens = 32;
  std::optional<Token> eos_token;

  std::size_t cell_count() const;
  void validate() const;
};

struct ReportRow {
  std::size_t cell_index = 0;
  double alpha = 0.0;
  std::size_t gamma = 0;
  std::string strategy;
  double eta = 0.0;
  std::string template_name;
  std::uint64_t seed = 0;
  double mat = 0.0;
  std::vector<double> acceptance_by_position;
  double tokens_per_second = 0.0;
  std::size_t output_tokens = 0;
  std::size_t target_forwards = 0;
  double input_budget_per_step = 0.0;
  std::string error;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

// Seed for the decode of prompt `prompt_index` under grid seed `seed`.
std::uint64_t run_seed(std::uint64_t seed, std::size_t prompt_index);

// Runs a single cell; exceptions are reported in ReportRow::error.
ReportRow run_cell(const SweepSpec& spec, std::size_t cell_index);

// Cells in parallel (OpenMP), rows in grid order. `jobs` 0 = runtime default.
std::vector<ReportRow> run_sweep(const SweepSpec& spec, int jobs = 0);
// Reference: same cells, one after another.
std::vector<ReportRow> run_sweep_serial(const SweepSpec& spec);

enum class ReportFormat { kCsv, kJson };

// Stable CSV header, in column order.
const std::vector<std::string>& csv_columns();

void write_report(std::ostream& out, const std::vector<ReportRow>& rows,
                  ReportFormat format, bool include_timing = false);
void emit_report(const std::string& path, const std::vector<ReportRow>& rows,
                 ReportFormat format, bool include_timing = false);
std::vector<ReportRow> parse_json_report(const std::string& text);
std::vector<ReportRow> parse_csv_report(const std::string& text);

}  // namespace refverify
