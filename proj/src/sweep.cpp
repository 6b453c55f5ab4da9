// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include <omp.h>

#include <string>

#include "refverify/bench.hpp"

namespace refverify {

namespace {

struct CellCoords {
  double alpha;
  std::size_t gamma;
  Strategy strategy;
  double eta;
  const NamedTemplate* tmpl;
  std::uint64_t seed;
};

NamedTemplate default_template(const SweepSpec& spec) {
  return {"[BACK]", ReflectiveTemplate{{spec.marker}, 4, true}};
}

// Row-major over (alpha, gamma, strategy, eta, template, seed); seed varies
// fastest.
CellCoords coords(const SweepSpec& spec, std::size_t index,
                  const std::vector<NamedTemplate>& templates) {
  CellCoords c{};
  c.seed = spec.seeds[index % spec.seeds.size()];
  index /= spec.seeds.size();
  c.tmpl = &templates[index % templates.size()];
  index /= templates.size();
  c.eta = spec.etas[index % spec.etas.size()];
  index /= spec.etas.size();
  c.strategy = spec.strategies[index % spec.strategies.size()];
  index /= spec.strategies.size();
  c.gamma = spec.gammas[index % spec.gammas.size()];
  index /= spec.gammas.size();
  c.alpha = spec.alphas[index];
  return c;
}

std::vector<NamedTemplate> effective_templates(const SweepSpec& spec) {
  if (!spec.templates.empty()) return spec.templates;
  return {default_template(spec)};
}

}  // namespace

std::size_t SweepSpec::cell_count() const {
  const std::size_t n_templates = templates.empty() ? 1 : templates.size();
  return alphas.size() * gammas.size() * strategies.size() * etas.size() *
         n_templates * seeds.size();
}

void SweepSpec::validate() const {
  if (alphas.empty() || gammas.empty() || strategies.empty() ||
      etas.empty() || seeds.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "sweep grids must be non-empty");
  }
  if (prompts.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "sweep needs at least one prompt");
  }
  base_model.validate();
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t prompt_index) {
  return hash_combine(seed, static_cast<std::uint64_t>(prompt_index));
}

ReportRow run_cell(const SweepSpec& spec, std::size_t cell_index) {
  const auto templates = effective_templates(spec);
  const CellCoords c = coords(spec, cell_index, templates);
  ReportRow row;
  row.cell_index = cell_index;
  row.alpha = c.alpha;
  row.gamma = c.gamma;
  row.strategy = to_string(c.strategy);
  row.eta = c.eta;
  row.template_name = c.tmpl->name;
  row.seed = c.seed;

  try {
    auto [target, draft] = make_divergence_pair(spec.base_model, c.eta);
    if (spec.beta > 0.0) {
      target = make_reflection_aware(target, spec.marker, spec.beta);
    }
    DecodeConfig config;
    config.gamma = c.gamma;
    config.alpha = c.alpha;
    config.temperature = spec.temperature;
    config.strategy = c.strategy;
    config.typical = spec.typical;
    config.entropy_source = spec.entropy_source;
    config.reflective_template = c.tmpl->tmpl;
    config.max_new_tokens = spec.max_new_tokens;
    config.eos_token = spec.eos_token;

    RunStats total;
    std::vector<std::size_t> accepted_at(c.gamma, 0);
    std::size_t budget_sum = 0;
    for (std::size_t j = 0; j < spec.prompts.size(); ++j) {
      config.seed = run_seed(c.seed, j);
      const DecodeResult result =
          decode(target, draft, spec.prompts[j], config);
      for (const auto& step : result.stats.steps) {
        for (std::size_t i = 0; i < step.accepted_n; ++i) ++accepted_at[i];
        budget_sum += step.input_budget;
        total.add(step);
      }
    }
    const double steps = static_cast<double>(total.steps.size());
    row.mat = mean_accepted_tokens(total);
    row.acceptance_by_position.reserve(c.gamma);
    for (std::size_t count : accepted_at) {
      row.acceptance_by_position.push_back(static_cast<double>(count) / steps);
    }
    row.tokens_per_second =
        total.wall_seconds > 0.0
            ? static_cast<double>(total.output_tokens) / total.wall_seconds
            : 0.0;
    row.output_tokens = total.output_tokens;
    row.target_forwards = total.target_forwards;
    row.input_budget_per_step = static_cast<double>(budget_sum) / steps;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<ReportRow> run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  const auto n = static_cast<std::ptrdiff_t>(spec.cell_count());
  std::vector<ReportRow> rows(static_cast<std::size_t>(n));
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)] =
        run_cell(spec, static_cast<std::size_t>(i));
  }
  return rows;
}

std::vector<ReportRow> run_sweep_serial(const SweepSpec& spec) {
  spec.validate();
  std::vector<ReportRow> rows;
  rows.reserve(spec.cell_count());
  for (std::size_t i = 0; i < spec.cell_count(); ++i) {
    rows.push_back(run_cell(spec, i));
  }
  return rows;
}

}  // namespace refverify
