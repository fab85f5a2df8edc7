#include <CLI11.hpp>

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mixsearch/calibration.hpp"
#include "mixsearch/corpusops.hpp"
#include "mixsearch/error.hpp"
#include "mixsearch/fusion_sweep.hpp"
#include "mixsearch/io.hpp"
#include "mixsearch/kernels.hpp"
#include "mixsearch/metrics.hpp"
#include "mixsearch/parallel.hpp"
#include "mixsearch/report.hpp"
#include "mixsearch/search.hpp"
#include "mixsearch/store.hpp"
#include "mixsearch/synth.hpp"

namespace fs = std::filesystem;
using namespace mixsearch;

namespace {

// Command output is held back so the reproducibility header, which needs
// every input digest, can come first.
std::string g_stdout;

[[gnu::format(printf, 1, 2)]] void say(const char* fmt, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  g_stdout += buf;
}

struct Globals {
  unsigned threads = 0;
  std::string kernel = "auto";
};

struct Header {
  std::string command;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<fs::path> inputs;
};

void print_header(const CLI::App& app, const Header& h, const Globals& g) {
  std::string out = "# mixsearch " MIXSEARCH_VERSION "\n# command: " + h.command + "\n";
  out += "# kernel: " + std::string(kernels::active().name) + "\n";
  out += "# threads: " + std::to_string(resolve_threads(g.threads)) + "\n";
  for (const auto& [name, seed] : h.seeds) out += "# seed " + name + ": " + std::to_string(seed) + "\n";
  for (const fs::path& p : h.inputs) {
    out += "# input " + p.string() + " fnv1a64=" + io::hex64(io::file_digest(p)) + "\n";
    if (fs::exists(store::meta_path(p))) {
      out += "# input " + store::meta_path(p).string() + " fnv1a64=" + io::hex64(io::file_digest(store::meta_path(p))) +
             "\n";
    }
  }
  auto dump = [&](const CLI::App& a, const std::string& prefix) {
    for (const CLI::Option* opt : a.get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name == "version") continue;
      std::string value;
      if (opt->count() > 0) {
        for (const std::string& r : opt->results()) value += (value.empty() ? "" : ",") + r;
      } else {
        value = opt->get_default_str();
      }
      out += "# flag " + prefix + name + "=" + value + "\n";
    }
  };
  dump(app, "");
  for (const CLI::App* sub : app.get_subcommands()) dump(*sub, sub->get_name() + ".");
  std::fputs(out.c_str(), stdout);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    g_stdout += text;
  } else {
    io::atomic_write(out_path, text);
    say("# wrote %s\n", out_path.c_str());
  }
}

store::Assembled load_corpus(const fs::path& path) { return store::assemble_corpus(store::read_store(path)); }

std::vector<double> grid_or_throw(const std::string& spec) { return report::parse_grid(spec); }

// Means for a run: a profile file, the input store itself, or none.
std::optional<calibration::CalibrationMeans> resolve_means(const std::string& means_path, bool self_calibrate,
                                                           const fs::path& store_path, bool prenormalize,
                                                           Header& header) {
  if (!means_path.empty() && self_calibrate) {
    throw Error(ErrorCode::InvalidArgument, "--means and --self-calibrate are mutually exclusive");
  }
  if (!means_path.empty()) {
    header.inputs.push_back(means_path);
    return calibration::means_from_store(store::read_store(means_path));
  }
  if (self_calibrate) {
    const auto records = calibration::records_from_store(store::read_store(store_path), prenormalize);
    return calibration::compute_means(records);
  }
  return std::nullopt;
}

// `key = value` lines become `--key value` arguments placed before the
// explicit ones, so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> injected;
  std::istringstream in(io::read_file(path));
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    std::string key = trim(eq == std::string::npos ? line : line.substr(0, eq));
    std::string value = eq == std::string::npos ? "true" : trim(line.substr(eq + 1));
    if (key.rfind("--", 0) != 0) key = "--" + key;
    if (value == "true") {
      injected.push_back(key);
    } else if (value != "false") {
      injected.push_back(key);
      injected.push_back(value);
    }
  }
  // After the subcommand name, which is the first non-option argument.
  std::size_t at = 1;
  while (at < args.size() && args[at].rfind("-", 0) == 0) {
    at += (args[at] == "--threads" || args[at] == "--kernel") ? 2 : 1;
  }
  at = std::min(at + 1, args.size());
  args.insert(args.begin() + static_cast<long>(at), injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-modality retrieval with modality-gap calibration"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0: MIXSEARCH_THREADS or hardware)");
  app.add_option("--kernel", g.kernel, "Vector kernel: auto, scalar, avx2, neon")
      ->check(CLI::IsMember({"auto", "scalar", "avx2", "neon"}));
  app.set_version_flag("--version", MIXSEARCH_VERSION);
  app.footer("Any subcommand accepts --config <file> of key=value lines; explicit flags take precedence.");

  Header header;
  std::function<void()> action;

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a paired corpus with a planted modality gap");
  synth::SynthConfig sc;
  std::size_t n_queries = 0;
  std::string synth_out, synth_qrels, synth_cal_out;
  std::size_t cal_n = 0;
  std::uint64_t cal_seed = 0;
  bool cal_seed_set = false;
  synth_cmd->add_option("--d", sc.dimension, "Dimension")->capture_default_str();
  synth_cmd->add_option("--semantic-dim", sc.semantic_dim, "Semantic coordinates")->capture_default_str();
  synth_cmd->add_option("--n", sc.n_docs, "Documents")->capture_default_str();
  synth_cmd->add_option("--n-queries", n_queries, "Queries (default: --n)");
  synth_cmd->add_option("--gap", sc.gap, "Gap magnitude g")->capture_default_str();
  synth_cmd->add_option("--sigma", sc.sigma, "Per-coordinate noise")->capture_default_str();
  synth_cmd->add_option("--seed", sc.seed, "Seed")->capture_default_str();
  synth_cmd->add_flag("--random-gap-direction", sc.random_gap_direction, "Random gap direction");
  synth_cmd->add_flag("--split-semantics", sc.split_semantics, "Text and image carry complementary halves");
  synth_cmd->add_option("--out", synth_out, "Output store")->required();
  synth_cmd->add_option("--qrels", synth_qrels, "Output qrels (default: <out>.qrels)");
  synth_cmd->add_option("--calibration-out", synth_cal_out, "Also write a held-out calibration store");
  synth_cmd->add_option("--calibration-n", cal_n, "Calibration draw size (default: --n)");
  auto* cal_seed_opt = synth_cmd->add_option("--calibration-seed", cal_seed, "Calibration draw seed");
  synth_cmd->callback([&] {
    cal_seed_set = cal_seed_opt->count() > 0;
    action = [&] {
      sc.n_queries = n_queries == 0 ? sc.n_docs : n_queries;
      header.seeds.push_back({"synth", sc.seed});
      const synth::SynthData data = synth::generate(sc);
      store::write_store(store::to_store(data.corpus, data.queries), synth_out);
      const std::string qrels_path = synth_qrels.empty() ? synth_out + ".qrels" : synth_qrels;
      store::write_qrels(data.qrels, qrels_path);
      say("# wrote %s (%zu documents, %zu queries)\n# wrote %s\n", synth_out.c_str(), data.corpus.size(),
                  data.queries.size(), qrels_path.c_str());
      if (!synth_cal_out.empty()) {
        const std::uint64_t seed = cal_seed_set ? cal_seed : synth::calibration_seed(sc);
        header.seeds.push_back({"calibration", seed});
        const synth::SynthData cal = synth::generate_calibration(sc, cal_n == 0 ? sc.n_docs : cal_n, seed);
        store::write_store(store::to_store(cal.corpus, cal.queries), synth_cal_out);
        say("# wrote %s (calibration seed %llu)\n", synth_cal_out.c_str(),
                    static_cast<unsigned long long>(seed));
      }
    };
  });

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "Estimate role/modality means from calibration stores");
  std::vector<std::string> cal_in;
  std::string cal_out, cal_keys, cal_profile, cal_query_means;
  bool cal_no_prenorm = false;
  cal_cmd->add_option("--in", cal_in, "Calibration store(s)")->required()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeAll);
  cal_cmd->add_option("--out", cal_out, "Output means profile")->required();
  cal_cmd->add_option("--keys", cal_keys, "Comma list of keys, e.g. query:text,part:image");
  cal_cmd->add_option("--profile", cal_profile, "Profile name stored with the means");
  cal_cmd->add_option("--query-means", cal_query_means, "Take query means from this profile instead");
  cal_cmd->add_flag("--no-prenormalize", cal_no_prenorm, "Skip L2 normalization before averaging");
  cal_cmd->callback([&] {
    action = [&] {
      std::vector<calibration::MeanKey> keys;
      std::stringstream ks(cal_keys);
      std::string k;
      while (std::getline(ks, k, ',')) {
        if (!k.empty()) keys.push_back(calibration::parse_mean_key(k));
      }
      std::vector<calibration::CalibrationRecord> records;
      for (const std::string& p : cal_in) {
        header.inputs.push_back(p);
        auto r = calibration::records_from_store(store::read_store(p), !cal_no_prenorm, keys);
        records.insert(records.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
      }
      calibration::CalibrationMeans means = calibration::compute_means(records);
      if (!cal_query_means.empty()) {
        header.inputs.push_back(cal_query_means);
        means = calibration::with_query_means(means, calibration::means_from_store(store::read_store(cal_query_means)));
      }
      means.profile = cal_profile;
      store::write_store(calibration::means_to_store(means), cal_out);
      for (const auto& [key, count] : means.sample_counts) {
        say("# mean %s samples=%llu\n", calibration::to_string(key).c_str(),
                    static_cast<unsigned long long>(count));
      }
      const auto t = calibration::part_key(Modality::Text);
      for (Modality other : {Modality::Image, Modality::Screenshot}) {
        const auto o = calibration::part_key(other);
        if (means.contains(t) && means.contains(o)) {
          const auto est = calibration::estimate_gap(means, t, o, records);
          say("# gap %s-%s magnitude=%.6f cosine_to_subspace=%.6f\n", calibration::to_string(t).c_str(),
                      calibration::to_string(o).c_str(), est.magnitude, est.cosine_to_subspace.value_or(0.0));
        }
      }
      say("# wrote %s\n", cal_out.c_str());
    };
  });

  // build-corpus
  auto* build_cmd = app.add_subcommand("build-corpus", "Build a replaced or mixed corpus from a paired store");
  std::string build_in, build_out, build_mode = "replace", build_repl = "bernoulli", build_ratios = "1:1:1",
                                   build_source = "text", build_target = "image", build_mask_out;
  double build_p = 0.5;
  std::uint64_t build_seed = corpusops::kDefaultSeed;
  build_cmd->add_option("--in", build_in, "Paired input store")->required();
  build_cmd->add_option("--out", build_out, "Output store")->required();
  build_cmd->add_option("--mode", build_mode, "replace or mix")->check(CLI::IsMember({"replace", "mix"}))
      ->capture_default_str();
  build_cmd->add_option("--p", build_p, "Replacement probability")->capture_default_str();
  build_cmd->add_option("--replacement", build_repl, "bernoulli or exact")->capture_default_str();
  build_cmd->add_option("--source", build_source, "Kept modality")->capture_default_str();
  build_cmd->add_option("--target", build_target, "Replacement modality")->capture_default_str();
  build_cmd->add_option("--ratios", build_ratios, "text:image:multimodal weights")->capture_default_str();
  build_cmd->add_option("--seed", build_seed, "Seed")->capture_default_str();
  build_cmd->add_option("--mask-out", build_mask_out, "Write replaced ids (replace) or `doc_id shape` lines (mix)");
  build_cmd->callback([&] {
    action = [&] {
      header.inputs.push_back(build_in);
      header.seeds.push_back({"corpus", build_seed});
      const store::Assembled in = load_corpus(build_in);
      std::string mask_text;
      Corpus out;
      if (build_mode == "replace") {
        corpusops::ReplacementPlan plan{build_p, corpusops::parse_replacement_mode(build_repl), build_seed,
                                        modality_from_string(build_source), modality_from_string(build_target)};
        corpusops::Replaced r = corpusops::apply_replacement(in.corpus, plan);
        for (const std::string& id : r.replaced_ids) mask_text += id + "\n";
        say("# replaced %zu of %zu documents\n", r.replaced_ids.size(), r.corpus.size());
        out = std::move(r.corpus);
      } else {
        corpusops::MixPlan plan;
        plan.ratios = corpusops::parse_ratios(build_ratios);
        plan.seed = build_seed;
        plan.text_modality = modality_from_string(build_source);
        plan.image_modality = modality_from_string(build_target);
        corpusops::Mixed m = corpusops::apply_mix(in.corpus, plan);
        std::array<std::size_t, 3> counts{};
        for (std::size_t i = 0; i < m.corpus.size(); ++i) {
          ++counts[static_cast<std::size_t>(m.shapes[i])];
          mask_text += m.corpus.documents[i].id + " " + std::string(corpusops::mix_shape_name(m.shapes[i])) + "\n";
        }
        say("# shapes text=%zu image=%zu multimodal=%zu\n", counts[0], counts[1], counts[2]);
        out = std::move(m.corpus);
      }
      store::write_store(store::to_store(out, in.queries), build_out);
      say("# wrote %s\n", build_out.c_str());
      if (!build_mask_out.empty()) emit(mask_text, build_mask_out);
    };
  });

  // Shared retrieval flags.
  struct RetrievalFlags {
    std::string store_path, qrels_path, means, out, k_list = "10,100", tag = "mixsearch";
    bool self_calibrate = false, no_prenormalize = false, renormalize_centered = false;
    double alpha = 0.5;
    std::string text_modality = "text", other_modality = "image";
  };
  auto add_retrieval = [](CLI::App* cmd, RetrievalFlags& f, bool store_required) {
    auto* s = cmd->add_option("--store", f.store_path, "Corpus + query store");
    if (store_required) s->required();
    cmd->add_option("--means", f.means, "Means profile (enables calibration)");
    cmd->add_flag("--self-calibrate", f.self_calibrate, "Compute means on the input store itself");
    cmd->add_flag("--no-prenormalize", f.no_prenormalize, "Skip L2 normalization of raw vectors");
    cmd->add_flag("--renormalize-centered", f.renormalize_centered,
                  "L2-normalize centered parts before fusion (ablation)");
    cmd->add_option("--alpha", f.alpha, "Fusion weight of the text modality")->capture_default_str();
    cmd->add_option("--text-modality", f.text_modality, "Fusion text-side modality")->capture_default_str();
    cmd->add_option("--other-modality", f.other_modality, "Fusion other modality")->capture_default_str();
    cmd->add_option("--out", f.out, "Output file (default: stdout)");
  };

  // search
  auto* search_cmd = app.add_subcommand("search", "Top-k retrieval; writes a run file");
  RetrievalFlags sf;
  std::size_t search_k = 10;
  std::vector<std::string> overrides;
  add_retrieval(search_cmd, sf, true);
  search_cmd->add_option("--k", search_k, "Results per query")->capture_default_str();
  search_cmd->add_option("--override", overrides, "modality=<m>:<v> or ids=<a,b|@file>:<v>[:pushdown]")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  search_cmd->add_option("--tag", sf.tag, "Run tag")->capture_default_str();
  search_cmd->callback([&] {
    action = [&] {
      header.inputs.push_back(sf.store_path);
      const store::Assembled in = load_corpus(sf.store_path);
      const auto means = resolve_means(sf.means, sf.self_calibrate, sf.store_path, !sf.no_prenormalize, header);
      search::RetrievalOptions ro;
      ro.k = search_k;
      ro.fusion = {sf.alpha, modality_from_string(sf.text_modality), modality_from_string(sf.other_modality),
                   sf.renormalize_centered};
      ro.means = means ? &*means : nullptr;
      ro.prenormalize = !sf.no_prenormalize;
      ro.threads = g.threads;
      for (const std::string& o : overrides) ro.overrides.push_back(search::parse_override(o));
      const search::RunResult run = search::run_retrieval(in.queries, in.corpus, ro);
      if (run.degenerate_vectors > 0) say("# degenerate vectors: %zu\n", run.degenerate_vectors);
      emit(search::format_run(run, sf.tag), sf.out);
    };
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a run file, or retrieve and evaluate a store");
  RetrievalFlags ef;
  std::string eval_run, eval_p_grid, eval_repl = "bernoulli";
  bool eval_recall1 = false;
  std::uint64_t eval_seed = corpusops::kDefaultSeed;
  int max_grade = 1;
  add_retrieval(eval_cmd, ef, false);
  eval_cmd->add_option("--run", eval_run, "Run file");
  eval_cmd->add_option("--qrels", ef.qrels_path, "Qrels file")->required();
  eval_cmd->add_option("--k", ef.k_list, "Comma list of NDCG cutoffs")->capture_default_str();
  eval_cmd->add_flag("--recall1", eval_recall1, "Also report Recall@1");
  eval_cmd->add_option("--max-grade", max_grade, "Largest relevance grade")->capture_default_str();
  eval_cmd->add_option("--p-grid", eval_p_grid, "Replace text parts over this p grid and emit a sweep CSV");
  eval_cmd->add_option("--replacement", eval_repl, "bernoulli or exact")->capture_default_str();
  eval_cmd->add_option("--seed", eval_seed, "Replacement seed")->capture_default_str();
  eval_cmd->callback([&] {
    action = [&] {
      const std::vector<std::size_t> ks = report::parse_k_list(ef.k_list);
      header.inputs.push_back(ef.qrels_path);
      const Qrels qrels = store::read_qrels(ef.qrels_path, max_grade);
      if (!eval_run.empty() == !ef.store_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "give exactly one of --run or --store");
      }
      if (!eval_run.empty()) {
        if (!eval_p_grid.empty()) throw Error(ErrorCode::InvalidArgument, "--p-grid needs --store");
        header.inputs.push_back(eval_run);
        const search::RunResult run = search::parse_run(io::read_file(eval_run));
        const metrics::MetricReport rep = metrics::evaluate_run(run, qrels, ks, eval_recall1);
        g_stdout += metrics::format_report_table(rep);
        emit(metrics::format_report_csv(rep), ef.out);
        return;
      }
      header.inputs.push_back(ef.store_path);
      const store::Assembled in = load_corpus(ef.store_path);
      const auto means = resolve_means(ef.means, ef.self_calibrate, ef.store_path, !ef.no_prenormalize, header);
      const fusion::FusionSpec spec{ef.alpha, modality_from_string(ef.text_modality),
                                    modality_from_string(ef.other_modality), ef.renormalize_centered};
      if (!eval_p_grid.empty()) {
        header.seeds.push_back({"replacement", eval_seed});
        const std::vector<double> grid = grid_or_throw(eval_p_grid);
        corpusops::ReplacementPlan plan{0.0, corpusops::parse_replacement_mode(eval_repl), eval_seed, spec.text_modality,
                                        spec.other_modality};
        corpusops::ExperimentOptions eo{ks, eval_recall1, !ef.no_prenormalize, g.threads};
        const report::SweepTable t =
            corpusops::p_sweep(in.corpus, in.queries, qrels, grid, plan, means ? &*means : nullptr, eo);
        emit(report::format_sweep_csv(t), ef.out);
        return;
      }
      search::RetrievalOptions ro;
      ro.k = *std::max_element(ks.begin(), ks.end());
      ro.fusion = spec;
      ro.means = means ? &*means : nullptr;
      ro.prenormalize = !ef.no_prenormalize;
      ro.threads = g.threads;
      const metrics::MetricReport rep =
          metrics::evaluate_run(search::run_retrieval(in.queries, in.corpus, ro), qrels, ks, eval_recall1);
      g_stdout += metrics::format_report_table(rep);
      emit(metrics::format_report_csv(rep), ef.out);
    };
  });

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Fusion-weight or replacement-probability sweep");
  RetrievalFlags wf;
  std::string alpha_grid, p_grid, sweep_repl = "bernoulli";
  bool calibrated = false;
  std::uint64_t sweep_seed = corpusops::kDefaultSeed;
  add_retrieval(sweep_cmd, wf, true);
  sweep_cmd->add_option("--qrels", wf.qrels_path, "Qrels file")->required();
  sweep_cmd->add_option("--k", wf.k_list, "Comma list of NDCG cutoffs")->capture_default_str();
  sweep_cmd->add_option("--alpha-grid", alpha_grid, "lo:hi:step or comma list");
  sweep_cmd->add_option("--p-grid", p_grid, "lo:hi:step or comma list");
  sweep_cmd->add_flag("--calibrated", calibrated, "Calibrate (requires --means or --self-calibrate)");
  sweep_cmd->add_option("--replacement", sweep_repl, "bernoulli or exact")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_seed, "Replacement seed")->capture_default_str();
  sweep_cmd->callback([&] {
    action = [&] {
      if (alpha_grid.empty() == p_grid.empty()) {
        throw Error(ErrorCode::InvalidArgument, "give exactly one of --alpha-grid or --p-grid");
      }
      if (calibrated && wf.means.empty() && !wf.self_calibrate) {
        throw Error(ErrorCode::InvalidArgument, "--calibrated needs --means or --self-calibrate");
      }
      if (!calibrated && (!wf.means.empty() || wf.self_calibrate)) {
        throw Error(ErrorCode::InvalidArgument, "--means/--self-calibrate given without --calibrated");
      }
      const std::vector<std::size_t> ks = report::parse_k_list(wf.k_list);
      header.inputs.push_back(wf.store_path);
      header.inputs.push_back(wf.qrels_path);
      const Qrels qrels = store::read_qrels(wf.qrels_path);
      const store::Assembled in = load_corpus(wf.store_path);
      const auto means = resolve_means(wf.means, wf.self_calibrate, wf.store_path, !wf.no_prenormalize, header);
      const Modality text = modality_from_string(wf.text_modality);
      const Modality other = modality_from_string(wf.other_modality);
      report::SweepTable t;
      if (!alpha_grid.empty()) {
        fusion::SweepOptions so{ks, true, !wf.no_prenormalize, g.threads, text, other, wf.renormalize_centered};
        t = fusion::alpha_sweep(in.corpus, in.queries, qrels, grid_or_throw(alpha_grid), means ? &*means : nullptr, so);
      } else {
        header.seeds.push_back({"replacement", sweep_seed});
        corpusops::ReplacementPlan plan{0.0, corpusops::parse_replacement_mode(sweep_repl), sweep_seed, text, other};
        corpusops::ExperimentOptions eo{ks, true, !wf.no_prenormalize, g.threads};
        t = corpusops::p_sweep(in.corpus, in.queries, qrels, grid_or_throw(p_grid), plan, means ? &*means : nullptr, eo);
      }
      emit(report::format_sweep_csv(t), wf.out);
    };
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Push-down simulation over a replacement grid");
  RetrievalFlags mf;
  std::string sim_grid = "0:1:0.1", sim_repl = "bernoulli", sim_ties = "native";
  bool pushdown = false;
  std::uint64_t sim_seed = corpusops::kDefaultSeed;
  sim_cmd->add_option("--store", mf.store_path, "Paired corpus + query store")->required();
  sim_cmd->add_option("--qrels", mf.qrels_path, "Qrels file")->required();
  sim_cmd->add_option("--out", mf.out, "Output CSV (default: stdout)");
  sim_cmd->add_flag("--pushdown", pushdown, "Pin replaced documents to score 0")->required();
  sim_cmd->add_option("--p-grid", sim_grid, "lo:hi:step or comma list")->capture_default_str();
  sim_cmd->add_option("--k", mf.k_list, "Comma list of NDCG cutoffs")->capture_default_str();
  sim_cmd->add_option("--replacement", sim_repl, "bernoulli or exact")->capture_default_str();
  sim_cmd->add_option("--ties", sim_ties, "Order inside the pushed block: native or id")
      ->check(CLI::IsMember({"native", "id"}))
      ->capture_default_str();
  sim_cmd->add_option("--source", mf.text_modality, "Kept modality")->capture_default_str();
  sim_cmd->add_option("--target", mf.other_modality, "Replacement modality")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Replacement seed")->capture_default_str();
  sim_cmd->callback([&] {
    action = [&] {
      const std::vector<std::size_t> ks = report::parse_k_list(mf.k_list);
      header.inputs.push_back(mf.store_path);
      header.inputs.push_back(mf.qrels_path);
      header.seeds.push_back({"replacement", sim_seed});
      const Qrels qrels = store::read_qrels(mf.qrels_path);
      const store::Assembled in = load_corpus(mf.store_path);
      corpusops::ReplacementPlan plan{0.0, corpusops::parse_replacement_mode(sim_repl), sim_seed,
                                      modality_from_string(mf.text_modality), modality_from_string(mf.other_modality)};
      corpusops::ExperimentOptions eo{ks, true, true, g.threads};
      const auto ties = sim_ties == "id" ? search::TieOrder::ById : search::TieOrder::ByNativeScore;
      emit(report::format_sweep_csv(
               corpusops::pushdown_sweep(in.corpus, in.queries, qrels, grid_or_throw(sim_grid), plan, eo, ties)),
           mf.out);
    };
  });

  for (CLI::App* sub : app.get_subcommands({})) sub->footer(app.get_footer());

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const Error& e) {
    std::fprintf(stderr, "mixsearch: %s\n", e.what());
    return e.is_io() ? 2 : 1;
  }
  std::vector<char*> cargs;
  for (std::string& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    kernels::select(g.kernel);
    std::string command;
    for (const CLI::App* sub : app.get_subcommands()) command = sub->get_name();
    header.command = command;
    action();
    print_header(app, header, g);
    std::fputs(g_stdout.c_str(), stdout);
  } catch (const Error& e) {
    std::fprintf(stderr, "mixsearch: %s\n", e.what());
    return e.is_io() ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mixsearch: %s\n", e.what());
    return 1;
  }
  return 0;
}
