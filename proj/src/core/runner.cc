// Copyright 2026 The HierNAS Authors.
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

#include "core/runner.h"

#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace hiernas {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", tmp.string()));
    out << text;
    if (!out.flush()) throw IoError(fmt::format("short write to {}", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot replace {}: {}", path.string(), ec.message()));
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

Genotype load_genotype(const fs::path& path) { return decode(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Run log

std::string csv_header() {
  return "step,wall_time_s,genotype_id,fitness,param_count,best_fitness_so_far,edit_class,"
         "level,motif,i,j,k_old,k_new\n";
}

std::string csv_row(const Individual& row) {
  const auto& r = row.record;
  std::string out = fmt::format("{},{:.3f},{},{},{},{},", r.step_index, r.wall_time, r.id.value,
                                r.fitness, r.param_count, r.best_so_far);
  if (r.trace) {
    const auto& t = *r.trace;
    out += fmt::format("{},{},{},{},{},{},{}", edit_class_name(classify_edit(t)), t.level,
                       t.motif, t.succ, t.pred, t.old_op, t.new_op);
  } else {
    out += "init,,,,,,";
  }
  return out + "\n";
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

json trace_to_json(const std::optional<MutationTrace>& t) {
  if (!t) return nullptr;
  return json::array({t->level, t->motif, t->succ, t->pred, t->old_op, t->new_op});
}

std::optional<MutationTrace> trace_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  const auto v = j.get<std::vector<int>>();
  if (v.size() != 6) throw IncompatibleCheckpoint("trace must have 6 entries");
  return MutationTrace{v[0], v[1], v[2], v[3], v[4], v[5]};
}

Genotype genotype_from_json(const json& j) {
  IdCounter scratch;
  return decode(j.get<std::string>(), scratch);
}

}  // namespace

std::string checkpoint_to_text(SearchMode mode, const RunConfig& cfg, const SearchState& state) {
  json rows = json::array();
  for (const auto& row : state.rows) {
    const auto& r = row->record;
    rows.push_back({
        {"id", r.id.value},
        {"fitness", r.fitness},
        {"param_count", r.param_count},
        {"eval_runs", r.eval_runs},
        {"step", r.step_index},
        {"wall_time", r.wall_time},
        {"best_so_far", r.best_so_far},
        {"trace", trace_to_json(r.trace)},
        {"failure", r.failure},
        {"genotype", encode(row->genotype)},
    });
  }
  json pending = json::array();
  for (const auto& item : state.pending) {
    pending.push_back({{"trace", trace_to_json(item.trace)}, {"genotype", encode(item.genotype)}});
  }
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["mode"] = search_mode_name(mode);
  doc["config"] = json::parse(config_to_text(cfg));
  doc["rng_state"] = state.rng_state;
  doc["next_id"] = state.next_id;
  doc["dispatched"] = state.dispatched;
  doc["elapsed"] = state.elapsed;
  doc["rows"] = std::move(rows);
  doc["pending"] = std::move(pending);
  return doc.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw IncompatibleCheckpoint(fmt::format("checkpoint is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object() || doc.value("format", "") != kCheckpointFormat) {
    throw IncompatibleCheckpoint("not a hiernas checkpoint");
  }
  if (doc.value("version", 0) != kCheckpointVersion) {
    throw IncompatibleCheckpoint(
        fmt::format("checkpoint version {} is not supported", doc.value("version", 0)));
  }
  Checkpoint ck;
  try {
    const auto mode = doc.at("mode").get<std::string>();
    if (mode == "evolve") {
      ck.mode = SearchMode::kEvolve;
    } else if (mode == "random") {
      ck.mode = SearchMode::kRandom;
    } else {
      throw IncompatibleCheckpoint(fmt::format("unknown search mode '{}'", mode));
    }
    ck.config = parse_config(doc.at("config").dump());
    auto& st = ck.state;
    st.rng_state = doc.at("rng_state").get<std::string>();
    st.next_id = doc.at("next_id").get<std::uint64_t>();
    st.dispatched = doc.at("dispatched").get<std::uint64_t>();
    st.elapsed = doc.at("elapsed").get<double>();
    for (const auto& jr : doc.at("rows")) {
      FitnessRecord r;
      r.id = GenotypeId{jr.at("id").get<std::uint64_t>()};
      r.fitness = jr.at("fitness").get<double>();
      r.param_count = jr.at("param_count").get<std::uint64_t>();
      r.eval_runs = jr.at("eval_runs").get<int>();
      r.step_index = jr.at("step").get<std::uint64_t>();
      r.wall_time = jr.at("wall_time").get<double>();
      r.best_so_far = jr.at("best_so_far").get<double>();
      r.trace = trace_from_json(jr.at("trace"));
      r.failure = jr.at("failure").get<std::string>();
      Genotype g = genotype_from_json(jr.at("genotype"));
      if (g.id() != r.id) throw IncompatibleCheckpoint("row id does not match its genotype");
      st.rows.push_back(std::make_shared<const Individual>(Individual{std::move(g), std::move(r)}));
    }
    for (const auto& jp : doc.at("pending")) {
      st.pending.push_back(
          WorkItem{genotype_from_json(jp.at("genotype")), trace_from_json(jp.at("trace"))});
    }
  } catch (const IncompatibleCheckpoint&) {
    throw;
  } catch (const Error& e) {
    throw IncompatibleCheckpoint(fmt::format("checkpoint content rejected: {}", e.what()));
  } catch (const json::exception& e) {
    throw IncompatibleCheckpoint(fmt::format("checkpoint field missing or mistyped: {}", e.what()));
  }
  for (const auto& row : ck.state.rows) {
    if (!(row->genotype.spec() == ck.config.search.representation)) {
      throw IncompatibleCheckpoint("row genotype does not match the checkpoint representation");
    }
  }
  return ck;
}

Checkpoint load_checkpoint(const fs::path& path) {
  return parse_checkpoint(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Runs

namespace {

class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir, SearchMode mode, const RunConfig& cfg)
      : dir_(std::move(dir)), mode_(mode), cfg_(cfg) {}

  // Starts run_log.csv from scratch, replaying `rows` first.
  void begin(const std::vector<MemoryTable::Row>& rows) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir_.string(), ec.message()));
    write_text_file(dir_ / kConfigFile, config_to_text(cfg_));
    log_ = std::fopen((dir_ / kRunLogFile).c_str(), "w");
    if (!log_) throw IoError(fmt::format("cannot write {}", (dir_ / kRunLogFile).string()));
    put(csv_header());
    for (const auto& row : rows) put(csv_row(*row));
  }

  ~ArtifactWriter() {
    if (log_) std::fclose(log_);
  }

  void record(const Individual& row) { put(csv_row(row)); }

  void checkpoint(const SearchState& state) {
    write_text_file(dir_ / kCheckpointFile, checkpoint_to_text(mode_, cfg_, state));
    const auto best = best_of(state.rows);
    if (best) write_best(best->genotype);
  }

  void write_best(const Genotype& g) {
    write_text_file(dir_ / kBestGenotypeFile, encode(g));
    export_dot(g, dir_ / kDotDir);
  }

 private:
  void put(const std::string& line) {
    if (std::fputs(line.c_str(), log_) < 0 || std::fflush(log_) != 0) {
      throw IoError(fmt::format("cannot append to {}", (dir_ / kRunLogFile).string()));
    }
  }

  fs::path dir_;
  SearchMode mode_;
  const RunConfig& cfg_;
  std::FILE* log_ = nullptr;
};

RunOutcome execute(SearchMode mode, const RunConfig& cfg, const RunOptions& opts,
                   const SearchState* resume) {
  const auto evaluator = make_evaluator(cfg);
  std::optional<ArtifactWriter> writer;
  if (opts.out_dir) {
    writer.emplace(*opts.out_dir, mode, cfg);
    writer->begin(resume ? resume->rows : std::vector<MemoryTable::Row>{});
  }
  SearchHooks hooks;
  if (writer) {
    hooks.on_record = [&](const Individual& row) { writer->record(row); };
    hooks.on_checkpoint = [&](const SearchState& state) { writer->checkpoint(state); };
  }
  if (opts.stop_after) {
    const auto limit = *opts.stop_after;
    hooks.should_stop = [limit](std::size_t records) { return records >= limit; };
  }
  RunOutcome out;
  out.mode = mode;
  out.config = cfg;
  out.result = run_search(mode, cfg.search, *evaluator, hooks, resume);
  return out;
}

}  // namespace

RunOutcome run_search_artifacts(SearchMode mode, const RunConfig& cfg, const RunOptions& opts) {
  return execute(mode, cfg, opts, nullptr);
}

RunOutcome resume_run(const fs::path& checkpoint, const RunConfig* override_cfg,
                      const RunOptions& opts) {
  Checkpoint ck = load_checkpoint(checkpoint);
  RunConfig cfg = ck.config;
  if (override_cfg) {
    if (!(override_cfg->search.representation == ck.config.search.representation)) {
      throw IncompatibleCheckpoint("config representation differs from the checkpoint's");
    }
    cfg = *override_cfg;
  }
  const auto budget = search_budget(ck.mode, cfg.search);
  if (ck.state.rows.size() >= budget && ck.state.pending.empty()) {
    RunOutcome out;
    out.mode = ck.mode;
    out.config = cfg;
    out.result.rows = ck.state.rows;
    out.result.best = best_of(out.result.rows);
    out.result.completed = true;
    out.already_complete = true;
    return out;
  }
  RunOptions resolved = opts;
  if (!resolved.out_dir) {
    resolved.out_dir = checkpoint.parent_path().empty() ? fs::path(".") : checkpoint.parent_path();
  }
  return execute(ck.mode, cfg, resolved, &ck.state);
}

// ---------------------------------------------------------------------------
// Inspection

std::vector<std::string> export_dot(const Genotype& g, const fs::path& dir) {
  if (auto report = validate(g); !report.ok()) throw InvalidGenotype(report.violations);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  std::vector<std::string> names;
  for (const auto& graph : to_dot_graphs(g)) {
    write_text_file(dir / graph.filename, graph.text);
    names.push_back(graph.filename);
  }
  return names;
}

std::string inspect_report(const Genotype& g, int height, int width) {
  std::string out;
  const auto report = validate(g);
  if (!report.ok()) {
    out += fmt::format("validation: {} violation(s)\n", report.violations.size());
    for (const auto& v : report.violations) out += "  " + v.to_string() + "\n";
    return out;
  }
  const auto& spec = g.spec();
  out += "validation: ok\n";
  out += fmt::format("levels: {}\nchannels: {}\n", spec.levels, spec.channels);
  for (int l = 2; l <= spec.levels; ++l) {
    for (int m = 1; m <= spec.motif_count(l); ++m) {
      const auto& motif = g.motif(l, m);
      out += fmt::format("level {} motif {}: {} nodes, {} edges\n", l, m, motif.nodes(),
                         motif.edge_count());
    }
  }
  FlatArchitecture flat;
  try {
    flat = flatten(g);
  } catch (const DegenerateArchitecture& e) {
    out += fmt::format("flat: degenerate ({})\n", e.what());
    return out;
  }
  out += fmt::format("flat: {} nodes, {} edges, depth {}\n", flat.node_count(), flat.edges.size(),
                     longest_path(flat));
  const TensorShape input{1, spec.channels, height, width};
  out += fmt::format("cell parameters: {}\n", count_parameters(flat, input, spec.channels));
  const auto shapes = infer_shapes(flat, input, spec.channels);
  out += "node shapes:\n";
  for (std::size_t v = 0; v < shapes.size(); ++v) {
    out += fmt::format("  {}: {}\n", v, to_string(shapes[v]));
  }
  return out;
}

}  // namespace hiernas
