/*
 * Copyright 2026 The g2v Authors.
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

#include "g2v/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "g2v/binary_io.hpp"
#include "g2v/checkpoint.hpp"
#include "g2v/config.hpp"
#include "g2v/embedding_cache.hpp"
#include "g2v/error.hpp"
#include "g2v/evaluation.hpp"
#include "g2v/graph_video.hpp"
#include "g2v/hash.hpp"
#include "g2v/pipeline.hpp"
#include "g2v/temporal_graph.hpp"
#include "g2v/trainer.hpp"
#include "g2v/video_encoder.hpp"

namespace g2v {
namespace fs = std::filesystem;

std::string Synopsis() {
  return "usage: g2v <ingest|render|encode|train|eval|gradcheck|cache> [options] "
         "(--help for details)";
}

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;
  std::string run_json;
};

struct Provenance {
  std::string command;
  std::map<std::string, std::string> inputs;  // path -> crc32 hex
  std::vector<uint64_t> seeds;
};

std::string Hex(uint64_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*llx", width, static_cast<unsigned long long>(v));
  return buf;
}

RunConfig ResolveConfig(const Common& common, Provenance& prov) {
  RunConfig config;
  if (!common.config_path.empty()) {
    const std::string text = io::ReadFile(common.config_path);
    prov.inputs[common.config_path] = Hex(Crc32(text), 8);
    config = ParseConfig(text);
  }
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kUsage, "--set expects key=value: " + kv);
    SetConfigValue(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.threads > 0) config.threads = common.threads;
  if (const char* env = std::getenv("G2V_CACHE_DIR"); env != nullptr && *env != '\0') {
    config.cache_dir = env;
  }
  config.Validate();
  return config;
}

TemporalGraph LoadGraph(const std::string& path, Provenance& prov, bool sort = false) {
  if (path.empty()) throw Error(ErrorKind::kUsage, "missing --events");
  const std::string text = io::ReadFile(path);
  prov.inputs[path] = Hex(Crc32(text), 8);
  std::istringstream in(text);
  return IngestEvents(in, IngestOptions{sort});
}

std::vector<Query> LoadPairs(const std::string& path, Provenance& prov) {
  const std::string text = io::ReadFile(path);
  prov.inputs[path] = Hex(Crc32(text), 8);
  std::istringstream in(text);
  std::string line;
  std::vector<Query> out;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("u,v,t", 0) == 0) continue;
    Query q;
    char tail = 0;
    unsigned long long u = 0, v = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%lf%c", &u, &v, &q.t, &tail) != 3) {
      throw Error(ErrorKind::kMalformedRow, path + " line " + std::to_string(line_no));
    }
    q.u = u;
    q.v = v;
    out.push_back(q);
  }
  return out;
}

void WriteRunJson(const std::string& path, const RunConfig& config, const Provenance& prov) {
  nlohmann::json j;
  j["command"] = prov.command;
  j["config_hash"] = Hex(config.Hash(), 16);
  j["config"] = config.ToText();
  j["seeds"] = prov.seeds;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [p, crc] : prov.inputs) inputs[p] = {{"crc32", crc}};
  j["inputs"] = inputs;
  j["frame_hash"] = Hex(config.Frame().ConfigHash(), 16);
  j["encoder_hash"] = Hex(config.Encoder().Hash(), 16);
  j["encoder_version"] = kEncoderVersion;
  j["checkpoint_version"] = kCheckpointVersion;
  const fs::path out(path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::WriteFileAtomic(path, j.dump(2) + "\n");
}

std::string RunJsonPath(const Common& common, const std::string& out_dir) {
  if (!common.run_json.empty()) return common.run_json;
  if (!out_dir.empty()) return (fs::path(out_dir) / "run.json").string();
  return "run.json";
}

std::unique_ptr<EmbeddingCache> OpenCache(const RunConfig& config, size_t d_vid) {
  if (config.cache_dir.empty()) return std::make_unique<EmbeddingCache>(d_vid);
  return std::make_unique<EmbeddingCache>(d_vid, config.cache_dir);
}

// Embedding source and cache for train/eval: either an imported .gve or
// the rendered toy encoder.
struct Embeddings {
  std::shared_ptr<const EmbeddingSource> source;
  std::unique_ptr<EmbeddingCache> cache;
};

Embeddings OpenEmbeddings(const RunConfig& config, const std::string& emb_path, Provenance& prov) {
  Embeddings e;
  if (!emb_path.empty()) {
    const std::string bytes = io::ReadFile(emb_path);
    prov.inputs[emb_path] = Hex(Crc32(bytes), 8);
    const GveFile file = DecodeGve(bytes, static_cast<size_t>(config.d_vid));
    e.cache = std::make_unique<EmbeddingCache>(ImportEmbeddings(emb_path, config.d_vid));
    e.source = std::make_shared<ImportedSource>(file.d_vid, file.config_hash);
    return e;
  }
  e.source = std::make_shared<RenderedVideoSource>(config.Frame(), config.Encoder());
  e.cache = OpenCache(config, static_cast<size_t>(config.d_vid));
  return e;
}

fs::path SeedDir(const std::string& out_dir, uint64_t seed) {
  return fs::path(out_dir) / ("seed-" + std::to_string(seed));
}

int RunIngest(const Common& common, const std::string& events, bool sort, const std::string& out,
              std::ostream& os) {
  Provenance prov{"ingest", {}, {}};
  const RunConfig config = ResolveConfig(common, prov);
  const TemporalGraph graph = LoadGraph(events, prov, sort);
  const SplitSpec split = ChronologicalSplit(graph, config.Ratios(), config.split_seed);
  if (!out.empty()) {
    std::ostringstream csv;
    WriteEvents(graph, csv);
    io::WriteFileAtomic(out, csv.str());
  }
  os << "events=" << graph.size() << " nodes=" << graph.ActiveNodes().size()
     << " edge_feat_dim=" << graph.edge_feat_dim() << " train_end=" << split.train_end_idx
     << " val_end=" << split.val_end_idx << " new_nodes=" << split.new_node_set.size() << "\n";
  WriteRunJson(RunJsonPath(common, ""), config, prov);
  return kExitOk;
}

std::string PairStem(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "pair-%06zu", i);
  return buf;
}

int RunRender(const Common& common, const std::string& events, const std::string& pairs_path,
              const std::string& out_dir, bool png_dump, std::ostream& os) {
  Provenance prov{"render", {}, {}};
  const RunConfig config = ResolveConfig(common, prov);
  const TemporalGraph graph = LoadGraph(events, prov);
  const auto pairs = LoadPairs(pairs_path, prov);
  const FrameSpec spec = config.Frame();
  spec.Validate();
  const NeighborIndex index(graph);
  fs::create_directories(out_dir);
  ParallelFor(pairs.size(), config.threads, [&](size_t i) {
    const Query& q = pairs[i];
    const GraphVideo video = BuildGraphVideo(q.u, q.v, q.t, spec, index);
    const fs::path stem = fs::path(out_dir) / PairStem(i);
    WriteGvf(video, stem.string() + ".gvf");
    if (png_dump) {
      for (int f = 0; f < video.frames; ++f) {
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "-f%02d.png", f);
        WriteFramePng(video, f, stem.string() + suffix);
      }
    }
  });
  os << "rendered=" << pairs.size() << " out=" << out_dir << "\n";
  WriteRunJson(RunJsonPath(common, out_dir), config, prov);
  return kExitOk;
}

int RunEncode(const Common& common, const std::string& in_dir, const std::string& out_path,
              std::ostream& os) {
  Provenance prov{"encode", {}, {}};
  const RunConfig config = ResolveConfig(common, prov);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".gvf") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  const EncoderConfig enc_config = config.Encoder();
  const FrozenVideoEncoder encoder(enc_config);
  auto cache = OpenCache(config, static_cast<size_t>(config.d_vid));
  std::vector<LinkEmbedding> records(files.size());
  std::vector<uint64_t> hashes(files.size());
  std::vector<std::string> crcs(files.size());
  ParallelFor(files.size(), config.threads, [&](size_t i) {
    const std::string bytes = io::ReadFile(files[i].string());
    crcs[i] = Hex(Crc32(bytes), 8);
    const GraphVideo video = DecodeGvf(bytes);
    enc_config.CheckCompatible(video.frames, video.height, video.width);
    const LinkKey key{video.key.u, video.key.v, video.key.t_star,
                      MixSeed(video.key.config_hash, enc_config.Hash())};
    records[i] = {key, cache->GetOrCompute(key, [&] { return encoder.Encode(video); })};
    hashes[i] = key.config_hash;
  });
  for (size_t i = 0; i < files.size(); ++i) prov.inputs[files[i].string()] = crcs[i];
  for (size_t i = 1; i < hashes.size(); ++i) {
    if (hashes[i] != hashes[0]) {
      throw Error(ErrorKind::kShapeMismatch, "inputs were rendered under different frame specs");
    }
  }
  const uint64_t hash = hashes.empty() ? MixSeed(config.Frame().ConfigHash(), enc_config.Hash())
                                       : hashes[0];
  io::WriteFileAtomic(out_path, EncodeGve(hash, static_cast<size_t>(config.d_vid), records));
  cache->Flush();
  os << "encoded=" << records.size() << " d_vid=" << config.d_vid
     << " config_hash=" << Hex(hash, 16)
     << " cache_hits=" << cache->hits() << " cache_misses=" << cache->misses() << "\n";
  const fs::path out(out_path);
  WriteRunJson(RunJsonPath(common, out.has_parent_path() ? out.parent_path().string() : ""),
               config, prov);
  return kExitOk;
}

EvalReport EvaluateModels(const RunConfig& config, LinkPipeline& pipeline,
                          std::map<uint64_t, LinkModel<float>>& models) {
  const NegativeSampler sampler(pipeline.graph(), pipeline.split());
  const ScorerFactory factory = [&](uint64_t seed) -> Scorer {
    LinkModel<float>& model = models.at(seed);
    return [&model, &pipeline](std::span<const Query> queries) {
      return ScoreQueries(model, pipeline, queries);
    };
  };
  return Evaluate(factory, pipeline.graph(), pipeline.split(), sampler, config.setting,
                  config.strategy, config.seeds, static_cast<size_t>(config.batch_size));
}

void WriteReport(const EvalReport& report, const std::string& out_dir, std::ostream& os) {
  io::WriteFileAtomic((fs::path(out_dir) / "report.json").string(), report.ToJson() + "\n");
  io::WriteFileAtomic((fs::path(out_dir) / "report.csv").string(),
                      EvalReport::CsvHeader() + "\n" + report.ToCsvRow() + "\n");
  os << EvalReport::CsvHeader() << "\n" << report.ToCsvRow() << "\n";
}

int RunTrain(const Common& common, const std::string& events, const std::string& emb,
             const std::string& out_dir_flag, std::ostream& os) {
  Provenance prov{"train", {}, {}};
  RunConfig config = ResolveConfig(common, prov);
  const std::string out_dir = out_dir_flag.empty() ? config.out_dir : out_dir_flag;
  if (out_dir.empty()) throw Error(ErrorKind::kUsage, "missing --out");
  const TemporalGraph graph = LoadGraph(events.empty() ? config.events : events, prov);
  const SplitSpec split = ChronologicalSplit(graph, config.Ratios(), config.split_seed);
  Embeddings e = OpenEmbeddings(config, emb.empty() ? config.embeddings : emb, prov);
  LinkPipeline pipeline(graph, split, e.source, e.cache.get(), config.Pipeline());
  prov.seeds = config.seeds;
  std::map<uint64_t, LinkModel<float>> models;
  for (uint64_t seed : config.seeds) {
    const fs::path dir = SeedDir(out_dir, seed);
    fs::create_directories(dir);
    std::string log = EpochLogHeader() + "\n";
    FitResult fit = TrainLinkPredictor(pipeline, config.Model(seed), config.Train(seed),
                                       [&](const EpochLog& entry) {
                                         log += FormatEpochLog(entry) + "\n";
                                       });
    io::WriteFileAtomic((dir / "log.csv").string(), log);
    SaveCheckpoint(fit.best, (dir / "model.g2vm").string());
    os << "seed=" << seed << " epochs=" << fit.log.size() << " best_epoch=" << fit.best_epoch
       << " best_val_ap=" << fit.best_val_ap << "\n";
    models.emplace(seed, std::move(fit.best));
  }
  const EvalReport report = EvaluateModels(config, pipeline, models);
  WriteReport(report, out_dir, os);
  e.cache->Flush();
  WriteRunJson(RunJsonPath(common, out_dir), config, prov);
  return kExitOk;
}

int RunEval(const Common& common, const std::string& events, const std::string& emb,
            const std::string& model_dir, const std::string& out_dir_flag, std::ostream& os) {
  Provenance prov{"eval", {}, {}};
  const RunConfig config = ResolveConfig(common, prov);
  const std::string out_dir = out_dir_flag.empty() ? model_dir : out_dir_flag;
  const TemporalGraph graph = LoadGraph(events.empty() ? config.events : events, prov);
  const SplitSpec split = ChronologicalSplit(graph, config.Ratios(), config.split_seed);
  Embeddings e = OpenEmbeddings(config, emb.empty() ? config.embeddings : emb, prov);
  LinkPipeline pipeline(graph, split, e.source, e.cache.get(), config.Pipeline());
  prov.seeds = config.seeds;
  std::map<uint64_t, LinkModel<float>> models;
  for (uint64_t seed : config.seeds) {
    ModelConfig mc = config.Model(seed);
    pipeline.Configure(mc);
    const std::string path = (SeedDir(model_dir, seed) / "model.g2vm").string();
    const std::string bytes = io::ReadFile(path);
    prov.inputs[path] = Hex(Crc32(bytes), 8);
    models.emplace(seed, DecodeCheckpoint(bytes, mc));
  }
  const EvalReport report = EvaluateModels(config, pipeline, models);
  fs::create_directories(out_dir);
  WriteReport(report, out_dir, os);
  e.cache->Flush();
  WriteRunJson(RunJsonPath(common, out_dir), config, prov);
  return kExitOk;
}

int RunGradcheck(const Common& common, double corrupt, std::ostream& os, std::ostream& err) {
  Provenance prov{"gradcheck", {}, {}};
  const RunConfig config = ResolveConfig(common, prov);
  prov.seeds = config.seeds;
  double worst = 0.0;
  std::string worst_where;
  for (uint64_t seed : config.seeds) {
    ModelConfig mc = config.Model(seed);
    const auto encoder = CreateDynamicEncoder(config.backbone, TemporalGraph(), config.Backbone());
    mc.node_input_dim = encoder->output_dim();
    mc.trainable_backbone = encoder->trainable_head();
    if (!mc.trainable_backbone) mc.node_dim = encoder->output_dim();
    LinkModel<double> model(mc);
    Rng rng(MixSeed(seed, Fnv1a64("gradcheck-batch")));
    std::vector<SampleInput> batch(static_cast<size_t>(config.gradcheck_batch));
    for (size_t i = 0; i < batch.size(); ++i) {
      SampleInput& s = batch[i];
      s.node_u.resize(mc.node_input_dim);
      s.node_v.resize(mc.node_input_dim);
      s.video.resize(mc.d_vid);
      for (auto& x : s.node_u) x = static_cast<float>(rng.UniformSymmetric(1.0));
      for (auto& x : s.node_v) x = static_cast<float>(rng.UniformSymmetric(1.0));
      for (auto& x : s.video) x = static_cast<float>(rng.UniformSymmetric(1.0));
      s.label = static_cast<float>(i % 2);
    }
    GradCheckOptions options;
    options.h = config.gradcheck_h;
    options.sample_params = static_cast<size_t>(config.gradcheck_params);
    options.seed = seed;
    options.corrupt_factor = corrupt;
    const auto result = FiniteDiffCheck(model, batch, options);
    os << "seed=" << seed << " fusion=" << FusionStrategyName(mc.fusion)
       << " checked=" << result.checked << " kinks_skipped=" << result.kinks_skipped
       << " max_rel_err=" << result.max_rel_error
       << " worst=" << result.worst_param << "\n";
    if (result.max_rel_error >= worst) {
      worst = result.max_rel_error;
      worst_where = result.worst_param;
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", worst);
  os << "max_rel_err=" << buf << "\n";
  WriteRunJson(RunJsonPath(common, ""), config, prov);
  if (worst > kGradCheckTolerance) {
    err << "error: GradCheckFailed: max_rel_err " << buf << " at " << worst_where << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int RunCache(const Common& common, const std::string& dir_flag, const std::string& import_path,
             const std::string& export_path, const std::string& hash_text, std::ostream& os) {
  Provenance prov{"cache", {}, {}};
  const RunConfig config = ResolveConfig(common, prov);
  const std::string dir = dir_flag.empty() ? config.cache_dir : dir_flag;
  if (dir.empty()) throw Error(ErrorKind::kUsage, "missing --dir (or G2V_CACHE_DIR)");
  size_t d_vid = static_cast<size_t>(config.d_vid);
  std::optional<GveFile> imported;
  if (!import_path.empty()) {
    const std::string bytes = io::ReadFile(import_path);
    prov.inputs[import_path] = Hex(Crc32(bytes), 8);
    imported = DecodeGve(bytes, d_vid);
  }
  EmbeddingCache cache(d_vid, dir);
  if (imported) {
    for (auto& r : imported->records) cache.Insert(r.key, std::move(r.vec));
    cache.Flush();
  }
  if (!export_path.empty()) {
    uint64_t hash = 0;
    if (!hash_text.empty()) {
      hash = std::stoull(hash_text, nullptr, 16);
    } else {
      const auto entries = cache.Entries();
      if (!entries.empty()) hash = entries.front().key.config_hash;
    }
    ExportEmbeddings(cache, hash, export_path);
  }
  std::map<uint64_t, size_t> per_hash;
  for (const auto& e : cache.Entries()) ++per_hash[e.key.config_hash];
  os << "entries=" << cache.size() << " quarantined=" << cache.quarantined()
     << " config_hashes=" << per_hash.size() << "\n";
  for (const auto& [h, n] : per_hash) {
    os << "config_hash=" << Hex(h, 16) << " entries=" << n << "\n";
  }
  WriteRunJson(RunJsonPath(common, ""), config, prov);
  return kExitOk;
}

void AddCommon(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "key=value config file");
  cmd->add_option("--set", common.overrides, "override one config key (key=value)");
  cmd->add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--run-json", common.run_json, "where to write the provenance record");
}

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"g2v: graph-video link prediction"};
  app.require_subcommand(1);
  Common common;
  std::string events, pairs, out_path, in_dir, emb, model_dir, dir, import_path, export_path,
      hash_text;
  bool sort = false, png_dump = false;
  double corrupt = 1.0;

  auto* ingest = app.add_subcommand("ingest", "validate an event log and report its split");
  AddCommon(ingest, common);
  ingest->add_option("--events", events)->required();
  ingest->add_flag("--sort", sort, "sort rows by timestamp instead of rejecting");
  ingest->add_option("--out", out_path, "write the canonical CSV here");

  auto* render = app.add_subcommand("render", "write one .gvf per (u,v,t) pair");
  AddCommon(render, common);
  render->add_option("--events", events)->required();
  render->add_option("--pairs", pairs, "CSV of u,v,t")->required();
  render->add_option("--out", out_path, "output directory")->required();
  render->add_flag("--png-dump", png_dump, "also write every frame as PNG");

  auto* encode = app.add_subcommand("encode", "encode a directory of .gvf into a .gve");
  AddCommon(encode, common);
  encode->add_option("--in", in_dir)->required();
  encode->add_option("--out", out_path)->required();

  auto* train = app.add_subcommand("train", "train one model per seed and evaluate it");
  AddCommon(train, common);
  train->add_option("--events", events);
  train->add_option("--emb", emb, "imported .gve embeddings");
  train->add_option("--out", out_path, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluate trained models");
  AddCommon(eval, common);
  eval->add_option("--events", events);
  eval->add_option("--emb", emb, "imported .gve embeddings");
  eval->add_option("--models", model_dir, "directory written by train")->required();
  eval->add_option("--out", out_path, "report directory (default: --models)");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  AddCommon(gradcheck, common);
  gradcheck->add_option("--corrupt", corrupt, "multiply analytic gradients (control)");

  auto* cache = app.add_subcommand("cache", "inspect, import into or export a cache directory");
  AddCommon(cache, common);
  cache->add_option("--dir", dir);
  cache->add_option("--import", import_path);
  cache->add_option("--export", export_path);
  cache->add_option("--hash", hash_text, "config hash (hex) to export");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << "\n" << Synopsis() << "\n";
    return kExitUsage;
  }

  try {
    if (ingest->parsed()) return RunIngest(common, events, sort, out_path, out);
    if (render->parsed()) return RunRender(common, events, pairs, out_path, png_dump, out);
    if (encode->parsed()) return RunEncode(common, in_dir, out_path, out);
    if (train->parsed()) return RunTrain(common, events, emb, out_path, out);
    if (eval->parsed()) return RunEval(common, events, emb, model_dir, out_path, out);
    if (gradcheck->parsed()) return RunGradcheck(common, corrupt, out, err);
    if (cache->parsed()) return RunCache(common, dir, import_path, export_path, hash_text, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.kind() == ErrorKind::kUsage) {
      err << Synopsis() << "\n";
      return kExitUsage;
    }
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << "\n";
    return kExitFailure;
  }
  err << Synopsis() << "\n";
  return kExitUsage;
}

int Dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return Dispatch(args, std::cout, std::cerr);
}

}  // namespace g2v
