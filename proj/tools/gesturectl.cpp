// SPDX-License-Identifier: Apache-2.0
// gesturectl: command line front end for the gesture pipeline.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gesture/baselines.hpp"
#include "gesture/checkpoint.hpp"
#include "gesture/config.hpp"
#include "gesture/corpus.hpp"
#include "gesture/error.hpp"
#include "gesture/lift.hpp"
#include "gesture/numfmt.hpp"
#include "gesture/render.hpp"
#include "gesture/synthesis.hpp"
#include "gesture/text.hpp"
#include "gesture/track_io.hpp"
#include "gesture/training.hpp"

namespace fs = std::filesystem;
using namespace gesture;

namespace {

std::string g_stage = "startup";

void stage(std::string name) { g_stage = std::move(name); }

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

Config resolve_config(const Globals& g) {
  stage("load config");
  Config c = g.config_path.empty() ? Config{} : load_config(g.config_path);
  if (g.seed) c.apply_seed(*g.seed);
  return c;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<EncodedRecord> encode_all(const std::vector<DatasetRecord>& records, const PcaModel& pca) {
  std::vector<EncodedRecord> out;
  out.reserve(records.size());
  for (const DatasetRecord& r : records) out.push_back(encode_record(r, pca));
  return out;
}

PcaModel fit_on_records(const std::vector<DatasetRecord>& records, int k) {
  std::vector<NormalizedPose> poses;
  for (const DatasetRecord& r : records) {
    for (const RawPose& f : r.frames) poses.push_back(normalize_pose(f));
  }
  return fit_pca(poses, k);
}

Checkpoint load_ck(const std::string& path) {
  stage("load checkpoint");
  if (path.empty()) throw Error(Errc::InvalidConfig, "--checkpoint is required");
  return load_checkpoint(path);
}

EmbeddingTable load_table(const Checkpoint& ck, const std::string& override_path) {
  stage("load embeddings");
  const std::string path = override_path.empty() ? ck.embeddings.path : override_path;
  if (path.empty()) throw Error(Errc::InvalidConfig, "checkpoint has no embedding reference; pass --embeddings");
  if (override_path.empty() && hash_file(path) != ck.embeddings.hash) {
    throw Error(Errc::InvalidModel, "embedding file " + path + " changed since training");
  }
  return load_embedding_table(path, ck.embeddings.dim).table;
}

std::vector<Token> read_query(const std::string& text, const std::string& text_file) {
  stage("tokenize");
  const std::string raw = text_file.empty() ? text : read_text(text_file);
  std::vector<Token> tokens = tokenize(raw);
  if (tokens.empty()) throw Error(Errc::EmptyInput, "text has no words");
  return tokens;
}

void print_metrics(const TrackMetrics& m, const std::string& out) {
  nlohmann::ordered_json j;
  j["mse"] = m.mse;
  j["mean_displacement"] = m.mean_displacement;
  j["variance"] = std::vector<double>(m.variance.data(), m.variance.data() + m.variance.size());
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out.empty()) write_text(out, text);
}

JointLimits read_limits(const std::string& path) {
  JointLimits limits;
  if (path.empty()) return limits;
  stage("load limits");
  try {
    const nlohmann::json j = nlohmann::json::parse(read_text(path));
    for (const auto& [key, value] : j.items()) {
      bool found = false;
      for (std::size_t d = 0; d < kNumDof; ++d) {
        if (dof_name(static_cast<Dof>(d)) == key) {
          limits.range[d] = std::make_pair(value.at(0).get<double>(), value.at(1).get<double>());
          found = true;
        }
      }
      if (!found) throw Error(Errc::InvalidConfig, "unknown joint '" + key + "' in " + path);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, path + ": " + e.what());
  }
  return limits;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-to-gesture pipeline: corpus tools, training, generation and retargeting"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file; flags override its values");
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");

  // synth-corpus
  auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic timed-transcript pose corpus");
  std::string synth_out;
  std::size_t synth_count = 500;
  std::string synth_emb;
  int synth_dim = kWordDim;
  synth->add_option("--out", synth_out, "Output JSON Lines file")->required();
  synth->add_option("--count", synth_count, "Number of sentences")->check(CLI::PositiveNumber);
  synth->add_option("--embeddings-out", synth_emb, "Also write a word-vector file for the corpus vocabulary");
  synth->add_option("--embed-dim", synth_dim, "Dimension of the written word vectors")->check(CLI::PositiveNumber);

  // curate
  auto* curate = app.add_subcommand("curate", "Filter records with the shot-selection rules");
  std::string cur_in, cur_out, cur_report;
  curate->add_option("--dataset", cur_in, "Input JSON Lines")->required();
  curate->add_option("--out", cur_out, "Kept records (JSON Lines)")->required();
  curate->add_option("--report", cur_report, "Per-record CSV report");

  // fit-pca
  auto* fitpca = app.add_subcommand("fit-pca", "Fit the pose PCA and store it in a checkpoint");
  std::string fp_in, fp_out, fp_csv;
  std::optional<int> fp_k;
  fitpca->add_option("--dataset", fp_in, "Curated JSON Lines")->required();
  fitpca->add_option("--out", fp_out, "Checkpoint to write")->required();
  fitpca->add_option("--components", fp_k, "Number of components");
  fitpca->add_option("--explained-csv", fp_csv, "Write per-component explained variance");

  // pca-sweep
  auto* sweep = app.add_subcommand("pca-sweep", "Render poses along one principal component");
  std::string sw_ck, sw_out;
  int sw_dim = 1;
  std::vector<double> sw_values = {-2.0, -1.0, 0.0, 1.0, 2.0};
  sweep->add_option("--checkpoint", sw_ck, "Checkpoint with a fitted PCA")->required();
  sweep->add_option("--dim", sw_dim, "1-based component index")->required();
  sweep->add_option("--values", sw_values, "Coefficients to render")->delimiter(',');
  sweep->add_option("--out-dir", sw_out, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train the text-to-gesture network");
  std::string tr_data, tr_emb, tr_pca, tr_out, tr_log;
  std::optional<int> tr_epochs, tr_hidden, tr_batch, tr_every;
  std::optional<double> tr_lr, tr_alpha, tr_beta, tr_dropout;
  train->add_option("--dataset", tr_data, "Curated JSON Lines")->required();
  train->add_option("--embeddings", tr_emb, "Word-vector text file")->required();
  train->add_option("--pca-checkpoint", tr_pca, "Reuse the PCA of this checkpoint instead of fitting");
  train->add_option("--out", tr_out, "Checkpoint to write")->required();
  train->add_option("--log", tr_log, "Per-epoch loss CSV");
  train->add_option("--epochs", tr_epochs);
  train->add_option("--hidden", tr_hidden);
  train->add_option("--batch-size", tr_batch);
  train->add_option("--lr", tr_lr);
  train->add_option("--alpha", tr_alpha);
  train->add_option("--beta", tr_beta);
  train->add_option("--dropout", tr_dropout);
  train->add_option("--checkpoint-every", tr_every, "Also write <out>.epochN every N epochs");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a gesture track for a text");
  std::string gen_ck, gen_text, gen_file, gen_emb, gen_out = ".";
  std::optional<double> gen_duration;
  gen->add_option("--checkpoint", gen_ck, "Trained checkpoint")->required();
  gen->add_option("--text", gen_text, "Speech text");
  gen->add_option("--text-file", gen_file, "Read the speech text from a file");
  gen->add_option("--duration", gen_duration, "Speech duration in seconds (default: estimated from the rate)");
  gen->add_option("--embeddings", gen_emb, "Override the word-vector file");
  gen->add_option("--out-dir", gen_out, "Directory for track.csv and attention.csv");

  // schedule
  auto* sched = app.add_subcommand("schedule", "Show the chunk plan for a text");
  std::string sc_text, sc_file, sc_out;
  std::optional<double> sc_duration;
  sched->add_option("--text", sc_text, "Speech text");
  sched->add_option("--text-file", sc_file, "Read the speech text from a file");
  sched->add_option("--duration", sc_duration, "Speech duration in seconds");
  sched->add_option("--out", sc_out, "Also write the plan as JSON");

  // lift-train
  auto* lift = app.add_subcommand("lift-train", "Train the 2D-to-3D lifting network on synthetic poses");
  std::string lt_ck, lt_out;
  std::size_t lt_samples = 6000;
  std::optional<int> lt_steps;
  lift->add_option("--checkpoint", lt_ck, "Checkpoint to extend")->required();
  lift->add_option("--out", lt_out, "Checkpoint to write")->required();
  lift->add_option("--samples", lt_samples, "Synthetic 3D poses to train on")->check(CLI::PositiveNumber);
  lift->add_option("--steps", lt_steps);

  // retarget
  auto* ret = app.add_subcommand("retarget", "Convert a gesture track into robot joint angles");
  std::string rt_ck, rt_track, rt_out, rt_limits;
  ret->add_option("--checkpoint", rt_ck, "Checkpoint with PCA and lifting network")->required();
  ret->add_option("--track", rt_track, "Track CSV")->required();
  ret->add_option("--out", rt_out, "Joint trajectory CSV")->required();
  ret->add_option("--limits", rt_limits, "JSON object of joint -> [lo, hi]");

  // baseline
  auto* base = app.add_subcommand("baseline", "Comparison tracks: random, nn or manual");
  base->require_subcommand(1);
  auto* b_random = base->add_subcommand("random", "A random training track aligned to the duration");
  auto* b_nn = base->add_subcommand("nn", "Nearest-neighbour text match");
  auto* b_manual = base->add_subcommand("manual", "A hand-authored track aligned to the duration");
  std::string bl_data, bl_ck, bl_text, bl_file, bl_manual, bl_out;
  std::optional<double> bl_duration;
  int bl_chunk = kDefaultChunkWords;
  for (auto* sub : {b_random, b_nn}) {
    sub->add_option("--dataset", bl_data, "Training JSON Lines")->required();
    sub->add_option("--checkpoint", bl_ck, "Checkpoint with the PCA")->required();
    sub->add_option("--out", bl_out, "Track CSV")->required();
  }
  b_random->add_option("--duration", bl_duration, "Speech duration in seconds")->required();
  b_nn->add_option("--text", bl_text, "Speech text");
  b_nn->add_option("--text-file", bl_file, "Read the speech text from a file");
  b_nn->add_option("--chunk-words", bl_chunk, "Words per matched chunk")->check(CLI::PositiveNumber);
  b_nn->add_option("--duration", bl_duration, "Align the result to this duration");
  b_manual->add_option("--file", bl_manual, "Hand-authored track CSV")->required();
  b_manual->add_option("--duration", bl_duration, "Speech duration in seconds")->required();
  b_manual->add_option("--out", bl_out, "Track CSV")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Objective metrics of a track against a reference");
  std::string ev_gen, ev_ref, ev_out;
  ev->add_option("--generated", ev_gen, "Track CSV")->required();
  ev->add_option("--reference", ev_ref, "Track CSV of equal length")->required();
  ev->add_option("--out", ev_out, "Also write the metrics as JSON");

  // render
  auto* rend = app.add_subcommand("render", "Draw a track as one SVG stick figure per frame");
  std::string rd_ck, rd_track, rd_out;
  bool rd_mean = false;
  rend->add_option("--checkpoint", rd_ck, "Checkpoint with the PCA")->required();
  rend->add_option("--track", rd_track, "Track CSV");
  rend->add_flag("--mean", rd_mean, "Render only the mean pose");
  rend->add_option("--out-dir", rd_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << app.help();
    return code;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Config cfg = resolve_config(g);

    if (*synth) {
      stage("synthesize");
      const auto records = synth_corpus(cfg.seed, synth_count);
      stage("write dataset");
      write_records_jsonl(records, synth_out);
      if (!synth_emb.empty()) {
        stage("write embeddings");
        save_embedding_table(make_synthetic_table(synthetic_vocabulary(), synth_dim, cfg.seed), synth_emb);
      }
      std::size_t frames = 0;
      for (const auto& r : records) frames += r.frames.size();
      std::cout << "wrote " << records.size() << " records (" << frames << " frames) to " << synth_out << "\n";
    } else if (*curate) {
      stage("read dataset");
      const auto records = read_records_jsonl(cur_in);
      stage("curate");
      const CurationResult result = curate_shots(records, cfg.curation);
      stage("write output");
      write_records_jsonl(result.kept, cur_out);
      if (!cur_report.empty()) {
        std::string csv = "id,kept,rule,value\n";
        for (const CurationEntry& e : result.report) {
          csv += e.id + "," + (e.kept ? "1" : "0") + "," +
                 (e.violated ? std::string(rule_name(*e.violated)) : std::string()) + "," +
                 (e.kept ? std::string() : format_double(e.value)) + "\n";
        }
        write_text(cur_report, csv);
      }
      std::cout << "kept " << result.kept.size() << " of " << records.size() << " records\n";
    } else if (*fitpca) {
      stage("read dataset");
      const auto records = read_records_jsonl(fp_in);
      if (fp_k) cfg.pca_components = *fp_k;
      cfg.model.pose_dim = cfg.pca_components;
      stage("fit pca");
      Checkpoint ck;
      ck.pca = fit_on_records(records, cfg.pca_components);
      ck.config_json = config_to_json(cfg);
      stage("write checkpoint");
      save_checkpoint(ck, fp_out);
      double total = 0.0;
      std::string csv = "component,ratio,cumulative\n";
      for (Eigen::Index k = 0; k < ck.pca.explained_variance_ratio.size(); ++k) {
        total += ck.pca.explained_variance_ratio(k);
        csv += std::to_string(k + 1) + "," + format_double(ck.pca.explained_variance_ratio(k)) + "," +
               format_double(total) + "\n";
      }
      if (!fp_csv.empty()) write_text(fp_csv, csv);
      std::cout << ck.pca.dim() << " components explain " << 100.0 * total << "% of pose variance\n";
    } else if (*sweep) {
      const Checkpoint ck = load_ck(sw_ck);
      stage("sweep");
      const auto poses = component_sweep(ck.pca, sw_dim, sw_values);
      stage("render");
      const auto files = render_frames(poses, cfg.fps, sw_out);
      std::cout << "rendered " << files.size() << " poses of component " << sw_dim << " to " << sw_out << "\n";
    } else if (*train) {
      if (tr_epochs) cfg.train.epochs = *tr_epochs;
      if (tr_hidden) cfg.model.hidden = *tr_hidden;
      if (tr_batch) cfg.train.batch_size = *tr_batch;
      if (tr_lr) cfg.train.lr = *tr_lr;
      if (tr_alpha) cfg.train.alpha = *tr_alpha;
      if (tr_beta) cfg.train.beta = *tr_beta;
      if (tr_dropout) cfg.train.dropout = *tr_dropout;
      cfg.paths.dataset = tr_data;
      cfg.paths.embeddings = tr_emb;
      cfg.paths.checkpoint = tr_out;
      Checkpoint ck;
      if (!tr_pca.empty()) {
        ck.pca = load_ck(tr_pca).pca;
        cfg.pca_components = ck.pca.dim();
      }
      cfg.model.pose_dim = cfg.pca_components;
      cfg.model.dropout = cfg.train.dropout;
      cfg.validate();

      stage("read dataset");
      const auto records = read_records_jsonl(tr_data);
      if (!ck.pca.fitted()) {
        stage("fit pca");
        ck.pca = fit_on_records(records, cfg.pca_components);
      }
      stage("encode dataset");
      const auto encoded = encode_all(records, ck.pca);
      const auto pairs = make_training_pairs(encoded, cfg.model.n, cfg.model.m);
      stage("load embeddings");
      const LoadedTable loaded = load_embedding_table(tr_emb, cfg.model.word_dim);
      ck.embeddings = {tr_emb, hash_file(tr_emb), loaded.table.dim()};

      stage("train");
      Seq2SeqModel model = init_model(cfg.model, cfg.seed);
      std::string log = "epoch,mse,continuity,variance,total\n";
      TrainCallbacks cb;
      cb.on_epoch = [&](int epoch, const LossBreakdown& l) {
        log += std::to_string(epoch) + "," + format_double(l.mse) + "," + format_double(l.continuity) + "," +
               format_double(l.variance) + "," + format_double(l.total) + "\n";
        std::cout << "epoch " << epoch << " loss " << l.total << " (mse " << l.mse << ")\n";
      };
      ck.config_json = config_to_json(cfg);
      if (tr_every && *tr_every > 0) {
        cb.checkpoint_every = *tr_every;
        cb.on_checkpoint = [&](int epoch, const Seq2SeqModel& snapshot) {
          Checkpoint partial = ck;
          partial.model = snapshot;
          save_checkpoint(partial, tr_out + ".epoch" + std::to_string(epoch));
        };
      }
      std::cout << pairs.size() << " training pairs from " << records.size() << " records\n";
      train_model(pairs, cfg.train, model, loaded.table, cb);
      ck.model = std::move(model);
      stage("write checkpoint");
      save_checkpoint(ck, tr_out);
      if (!tr_log.empty()) write_text(tr_log, log);
      std::cout << "wrote " << tr_out << "\n";
    } else if (*gen) {
      const Checkpoint ck = load_ck(gen_ck);
      if (!ck.model) throw Error(Errc::UntrainedModel, gen_ck + " holds no trained network");
      const EmbeddingTable table = load_table(ck, gen_emb);
      const auto tokens = read_query(gen_text, gen_file);
      stage("plan");
      const double duration = gen_duration ? *gen_duration : estimate_speech_duration(tokens, cfg.words_per_minute);
      const ChunkPlan plan = plan_chunks(tokens, duration, ck.model->config.n, ck.model->config.m, cfg.fps);
      stage("generate");
      const GeneratedGesture result = generate_gesture(*ck.model, plan, table);
      const TimedPoseTrack aligned = align_track(result.track, duration);
      stage("write output");
      ensure_dir(gen_out);
      write_track_csv(aligned, fs::path(gen_out) / "track.csv");
      write_attention_csv(assemble_attention(result.attention, plan), fs::path(gen_out) / "attention.csv");
      std::cout << tokens.size() << " words, " << plan.chunks.size() << " chunks of " << plan.words_per_chunk
                << " words, " << aligned.frames.size() << " frames for " << duration << " s\n";
    } else if (*sched) {
      const auto tokens = read_query(sc_text, sc_file);
      stage("plan");
      const double duration = sc_duration ? *sc_duration : estimate_speech_duration(tokens, cfg.words_per_minute);
      const ChunkPlan plan = plan_chunks(tokens, duration, cfg.model.n, cfg.model.m, cfg.fps);
      nlohmann::ordered_json j;
      j["total_words"] = plan.total_words;
      j["speech_duration"] = plan.speech_duration;
      j["words_per_chunk"] = plan.words_per_chunk;
      j["inferences"] = plan.chunks.size();
      j["frames"] = static_cast<std::size_t>(std::ceil(duration * cfg.fps - 1e-9));
      j["chunks"] = plan.chunks;
      const std::string text = j.dump(2) + "\n";
      std::cout << text;
      if (!sc_out.empty()) write_text(sc_out, text);
    } else if (*lift) {
      Checkpoint ck = load_ck(lt_ck);
      if (lt_steps) cfg.lift.steps = *lt_steps;
      stage("synthesize poses");
      const auto poses = synth_pose3d_corpus(cfg.seed, lt_samples);
      const std::size_t held = std::max<std::size_t>(1, poses.size() / 10);
      const std::span<const Pose3D> all(poses);
      stage("train lift");
      LiftNet net = train_lift(all.first(poses.size() - held), cfg.lift);
      std::vector<LiftSample> test;
      for (const Pose3D& p : all.last(held)) test.push_back(project_sample(p));
      double zero = 0.0;
      for (const LiftSample& s : test) zero += s.depths.squaredNorm() / static_cast<double>(s.depths.size());
      zero /= static_cast<double>(test.size());
      const double mse = depth_mse(net, test);
      ck.lift = std::move(net);
      stage("write checkpoint");
      save_checkpoint(ck, lt_out);
      std::cout << "held-out depth mse " << mse << " (zero predictor " << zero << ")\n";
    } else if (*ret) {
      const Checkpoint ck = load_ck(rt_ck);
      if (!ck.lift) throw Error(Errc::UntrainedModel, rt_ck + " holds no lifting network");
      const JointLimits limits = read_limits(rt_limits);
      stage("read track");
      const TimedPoseTrack track = read_track_csv(rt_track);
      stage("retarget");
      const JointTrajectory trajectory = retarget_track(track, ck.pca, *ck.lift, limits);
      stage("write output");
      write_trajectory_csv(trajectory, rt_out);
      std::cout << "wrote " << trajectory.rows.size() << " joint-angle rows to " << rt_out << "\n";
    } else if (*base) {
      TimedPoseTrack track;
      if (*b_manual) {
        stage("manual baseline");
        track = manual_baseline(bl_manual, *bl_duration);
      } else {
        const Checkpoint ck = load_ck(bl_ck);
        stage("read dataset");
        const auto encoded = encode_all(read_records_jsonl(bl_data), ck.pca);
        if (*b_random) {
          stage("random baseline");
          std::mt19937_64 rng(cfg.seed);
          track = random_baseline(encoded, *bl_duration, rng);
        } else {
          const auto tokens = read_query(bl_text, bl_file);
          stage("nn baseline");
          track = nn_baseline(tokens, encoded, bl_chunk);
          if (bl_duration) track = align_track(track, *bl_duration);
        }
      }
      stage("write output");
      write_track_csv(track, bl_out);
      std::cout << "wrote " << track.frames.size() << " frames to " << bl_out << "\n";
    } else if (*ev) {
      stage("read tracks");
      const TimedPoseTrack generated = read_track_csv(ev_gen);
      const TimedPoseTrack reference = read_track_csv(ev_ref);
      stage("eval");
      print_metrics(eval_tracks(generated, reference), ev_out);
    } else if (*rend) {
      const Checkpoint ck = load_ck(rd_ck);
      stage("render");
      std::vector<std::string> files;
      if (rd_mean) {
        const std::array<NormalizedPose, 1> mean = {decode_pose(ck.pca, GestureVector::Zero(ck.pca.dim()))};
        files = render_frames(mean, cfg.fps, rd_out);
      } else {
        if (rd_track.empty()) throw Error(Errc::InvalidConfig, "--track or --mean is required");
        files = render_track(read_track_csv(rd_track), ck.pca, rd_out);
      }
      std::cout << "rendered " << files.size() << " frames to " << rd_out << "\n";
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::cerr << "gesturectl " << command << ": " << g_stage << ": " << msg << "\n";
    return 1;
  }
  return 0;
}
