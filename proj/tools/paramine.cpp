#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "paramine/pipeline.hpp"
#include "paramine/service_http.hpp"

namespace fs = std::filesystem;
using namespace paramine;

namespace {

// Writes to a file, or stdout when the path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path_.empty() && path_ != "-") file_ = open_output(path_);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void close() {
    if (file_.is_open()) close_output(file_, path_);
    else std::cout.flush();
  }

 private:
  std::string path_;
  std::ofstream file_;
};

std::vector<fs::path> to_paths(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

std::vector<std::size_t> to_ks(const std::vector<std::string>& v) {
  std::vector<std::size_t> ks;
  for (const auto& s : v) ks.push_back(require_int<std::size_t>(s, "k"));
  return ks;
}

std::vector<double> to_thresholds(const std::vector<std::string>& v) {
  std::vector<double> out;
  for (const auto& s : v) out.push_back(require_double(s, "threshold"));
  return out;
}

SplitTarget to_split(const std::string& s) {
  auto split = parse_split(s);
  if (!split) throw Error("split must be dev or test");
  return *split;
}

PairSet gold_set(const std::string& path) {
  const auto pairs = load_pairs(path);
  return PairSet(pairs.begin(), pairs.end());
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentential paraphrase mining through pivot languages"};
  app.set_version_flag("--version", std::string(kBuildId));
  app.require_subcommand(1);
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // ingest
  IngestOptions ingest_opt;
  std::string ingest_in, ingest_out;
  auto* ingest_cmd = app.add_subcommand("ingest", "Normalize a bitext and split it by year");
  ingest_cmd->add_option("--target-lang", ingest_opt.target_lang)->required();
  ingest_cmd->add_option("--pivot-lang", ingest_opt.pivot_lang)->required();
  ingest_cmd->add_option("--in", ingest_in)->required();
  ingest_cmd->add_option("--out-dir", ingest_out)->required();
  ingest_cmd->add_flag("--dedupe", ingest_opt.dedupe, "Collapse consecutive duplicate lines");
  ingest_cmd->callback([&] {
    ingest_opt.in = ingest_in;
    ingest_opt.out_dir = ingest_out;
    const auto s = ingest(ingest_opt);
    std::cerr << "ingest: " << s.input_lines << " lines, " << s.accepted << " accepted, "
              << s.skipped << " skipped";
    if (ingest_opt.dedupe) std::cerr << ", " << s.duplicates_removed << " duplicates removed";
    std::cerr << " (train " << s.per_partition.at(Partition::train) << ", dev "
              << s.per_partition.at(Partition::dev) << ", test "
              << s.per_partition.at(Partition::test) << ")\n";
  });

  // count
  std::vector<std::string> count_in;
  std::string count_out, count_lang;
  auto* count_cmd = app.add_subcommand("count", "Build a co-occurrence table");
  count_cmd->add_option("--in", count_in, "Bitext files of one pivot language")
      ->required()
      ->delimiter(',');
  count_cmd->add_option("--out", count_out)->required();
  count_cmd->add_option("--pivot-lang", count_lang, "Overrides the file header");
  count_cmd->callback([&] { save_table(count_out, count_files(to_paths(count_in), count_lang)); });

  // score
  std::string score_scheme, score_pairs, score_out;
  std::vector<std::string> score_tables;
  auto* score_cmd = app.add_subcommand("score", "Score phrase pairs");
  score_cmd->add_option("--scheme", score_scheme)->required();
  score_cmd->add_option("--tables", score_tables)->required()->delimiter(',');
  score_cmd->add_option("--pairs", score_pairs)->required();
  score_cmd->add_option("--out", score_out);
  score_cmd->callback([&] {
    Output out(score_out);
    const auto na = score_file(require_scheme(score_scheme), to_paths(score_tables), score_pairs,
                               out.stream());
    out.close();
    if (na) std::cerr << "score: " << na << " pairs undefined (NA)\n";
  });

  // mine
  std::string mine_scheme = "sum_pmi", mine_out;
  std::vector<std::string> mine_tables;
  int mine_support = 1;
  auto* mine_cmd = app.add_subcommand("mine", "Rank all candidate pairs");
  mine_cmd->add_option("--tables", mine_tables)->required()->delimiter(',');
  mine_cmd->add_option("--scheme", mine_scheme);
  mine_cmd->add_option("--min-support", mine_support)->check(CLI::PositiveNumber);
  mine_cmd->add_option("--out", mine_out)->required();
  mine_cmd->callback([&] {
    const auto ranked =
        mine({to_paths(mine_tables), require_scheme(mine_scheme), mine_support, jobs});
    save_ranked(mine_out, ranked);
    std::cerr << "mine: " << ranked.entries.size() << " pairs\n";
  });

  // sample
  std::string sample_ranked, sample_out;
  std::size_t sample_n = 1000;
  std::uint64_t sample_seed = 1;
  auto* sample_cmd = app.add_subcommand("sample", "Draw a uniform annotation sample");
  sample_cmd->add_option("--ranked", sample_ranked)->required();
  sample_cmd->add_option("--n", sample_n);
  sample_cmd->add_option("--seed", sample_seed);
  sample_cmd->add_option("--out", sample_out);
  sample_cmd->callback([&] {
    Output out(sample_out);
    write_sample(out.stream(),
                 sample_for_annotation(load_ranked(sample_ranked), sample_n, sample_seed));
    out.close();
  });

  // curve
  std::string curve_ranked, curve_ann, curve_out;
  auto* curve_cmd = app.add_subcommand("curve", "Cumulative quality along a ranking");
  curve_cmd->add_option("--ranked", curve_ranked)->required();
  curve_cmd->add_option("--annotations", curve_ann)->required();
  curve_cmd->add_option("--out", curve_out);
  curve_cmd->callback([&] {
    Output out(curve_out);
    write_curve(out.stream(), curve_from_files(curve_ranked, curve_ann));
    out.close();
  });

  // cutoff
  std::string cutoff_curve, cutoff_out;
  std::vector<std::string> cutoff_thresholds = {"0.95", "0.90", "0.75"};
  auto* cutoff_cmd = app.add_subcommand("cutoff", "Largest ranking prefix meeting each accuracy");
  cutoff_cmd->add_option("--curve", cutoff_curve)->required();
  cutoff_cmd->add_option("--thresholds", cutoff_thresholds)->delimiter(',');
  cutoff_cmd->add_option("--out", cutoff_out);
  cutoff_cmd->callback([&] {
    Output out(cutoff_out);
    write_cutoffs(out.stream(), load_curve(cutoff_curve), to_thresholds(cutoff_thresholds));
    out.close();
  });

  // filter
  std::string filter_in, filter_out;
  EditFilterConfig filter_cfg;
  auto* filter_cmd = app.add_subcommand("filter", "Drop near-identical pairs by edit distance");
  filter_cmd->add_option("--ranked", filter_in)->required();
  filter_cmd->add_option("--out", filter_out)->required();
  filter_cmd->add_option("--short-cutoff", filter_cfg.short_cutoff);
  filter_cmd->add_option("--base-threshold", filter_cfg.base_threshold);
  filter_cmd->add_option("--short-threshold", filter_cfg.short_threshold);
  filter_cmd->callback([&] {
    const auto in = load_ranked(filter_in);
    const auto kept = filter_ranked(in, filter_cfg);
    save_ranked(filter_out, kept);
    std::cerr << "filter: kept " << kept.entries.size() << " of " << in.entries.size() << "\n";
  });

  // split
  std::string split_in, split_target, split_out;
  std::vector<std::string> split_train, split_dev;
  auto* split_cmd = app.add_subcommand("split", "Remove pairs seen in earlier sets");
  split_cmd->add_option("--candidates", split_in)->required();
  split_cmd->add_option("--train", split_train, "Pair files of the training set")
      ->required()
      ->delimiter(',');
  split_cmd->add_option("--dev", split_dev, "Pair files of the dev set")->delimiter(',');
  split_cmd->add_option("--target", split_target)->required();
  split_cmd->add_option("--out", split_out);
  split_cmd->callback([&] {
    const auto kept = split_ranked(load_ranked(split_in), load_pair_set(to_paths(split_train)),
                                   load_pair_set(to_paths(split_dev)), to_split(split_target));
    Output out(split_out);
    write_pair_list(out.stream(), ranking_pairs(kept));
    out.close();
  });

  // serve
  std::string serve_queue, serve_store, serve_host = "127.0.0.1", serve_annotators, serve_static;
  int serve_port = 8080;
  double serve_lease_hours = 24;
  std::optional<std::uint64_t> serve_shuffle;
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation service");
  serve_cmd->add_option("--queue", serve_queue)->required();
  serve_cmd->add_option("--store", serve_store)->required();
  serve_cmd->add_option("--port", serve_port);
  serve_cmd->add_option("--host", serve_host);
  serve_cmd->add_option("--lease-hours", serve_lease_hours);
  serve_cmd->add_option("--annotators", serve_annotators, "File of allowed annotator ids");
  serve_cmd->add_option("--shuffle", serve_shuffle, "Shuffle the queue with this seed");
  serve_cmd->add_option("--static", serve_static, "Directory of the browser client");
  serve_cmd->callback([&] {
    auto qin = open_input(serve_queue);
    ServiceOptions options;
    options.lease = std::chrono::milliseconds(
        static_cast<long long>(serve_lease_hours * 3600.0 * 1000.0));
    if (!serve_annotators.empty()) {
      auto in = open_input(serve_annotators);
      std::set<std::string> ids;
      std::string line;
      while (read_line(in, line)) {
        auto id = normalize_text(line);
        if (!id.empty() && id.front() != '#') ids.insert(id);
      }
      options.allowed_annotators = std::move(ids);
    }
    AnnotationService service(read_queue(qin, serve_shuffle), serve_store, options);
    if (service.truncated_bytes())
      std::cerr << "serve: dropped " << service.truncated_bytes()
                << " bytes of a torn record at the end of the store\n";
    httplib::Server server;
    std::optional<fs::path> static_dir;
    if (!serve_static.empty()) static_dir = serve_static;
    install_routes(server, service, static_dir);
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    std::cerr << "serve: listening on " << serve_host << ":" << serve_port << "\n";
    if (!server.listen(serve_host, serve_port))
      throw Error("cannot listen on " + serve_host + ":" + std::to_string(serve_port));
  });

  // adjudicate
  std::string adj_store, adj_out;
  auto* adj_cmd = app.add_subcommand("adjudicate", "Labels of all doubly judged pairs");
  adj_cmd->add_option("--store", adj_store)->required();
  adj_cmd->add_option("--out", adj_out);
  adj_cmd->callback([&] {
    Output out(adj_out);
    write_labels(out.stream(), adjudicate_judgments(scan_judgment_log(adj_store).judgments));
    out.close();
  });

  // export
  std::string export_store, export_queue, export_split, export_out;
  auto* export_cmd = app.add_subcommand("export", "Write an annotated dev or test set");
  export_cmd->add_option("--store", export_store)->required();
  export_cmd->add_option("--queue", export_queue)->required();
  export_cmd->add_option("--split", export_split)->required();
  export_cmd->add_option("--out", export_out);
  export_cmd->callback([&] {
    const auto judged = judged_pairs_from_store(export_store, export_queue);
    Output out(export_out);
    export_sets(judged, to_split(export_split), out.stream());
    out.close();
  });

  // synth
  std::string synth_spec_path, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth_cmd = app.add_subcommand("synth", "Generate bitexts with planted paraphrases");
  synth_cmd->add_option("--spec", synth_spec_path, "key=value spec; defaults when omitted");
  synth_cmd->add_option("--seed", synth_seed, "Overrides the seed in --spec");
  synth_cmd->add_option("--out-dir", synth_out)->required();
  synth_cmd->callback([&] {
    SyntheticSpec spec;
    if (!synth_spec_path.empty()) {
      auto in = open_input(synth_spec_path);
      spec = parse_synthetic_spec(in);
    }
    if (synth_seed) spec.seed = *synth_seed;
    const auto corpus = generate_synthetic(spec);
    write_synthetic(synth_out, spec, corpus);
    std::cerr << "synth: " << corpus.langs.size() << " bitexts, " << corpus.gold.size()
              << " gold pairs\n";
  });

  // eval
  std::string eval_ranked, eval_gold, eval_annotated, eval_split, eval_synth, eval_out;
  std::vector<std::string> eval_ks = {"10", "50", "100"}, eval_schemes;
  bool eval_final = false;
  auto* eval_cmd = app.add_subcommand("eval", "Precision at k of rankings");
  eval_cmd->add_option("--ranked", eval_ranked);
  eval_cmd->add_option("--gold", eval_gold, "Pair file of true paraphrases");
  eval_cmd->add_option("--annotated", eval_annotated, "Exported annotated set");
  eval_cmd->add_option("--split", eval_split, "dev or test; checked against the file");
  eval_cmd->add_flag("--final", eval_final, "Allow evaluation on the test split");
  eval_cmd->add_option("--synth-dir", eval_synth, "Compare schemes on a synth output dir");
  eval_cmd->add_option("--schemes", eval_schemes)->delimiter(',');
  eval_cmd->add_option("--k", eval_ks)->delimiter(',');
  eval_cmd->add_option("--out", eval_out);
  eval_cmd->callback([&] {
    const auto ks = to_ks(eval_ks);
    std::vector<SchemeReport> reports;
    if (!eval_synth.empty()) {
      std::vector<SchemeId> schemes;
      for (const auto& s : eval_schemes) schemes.push_back(require_scheme(s));
      if (schemes.empty()) schemes.assign(kSymmetricSchemes.begin(), kSymmetricSchemes.end());
      std::vector<fs::path> bitexts;
      for (const auto& entry : fs::directory_iterator(eval_synth)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("bitext.", 0) == 0) bitexts.push_back(entry.path());
      }
      std::sort(bitexts.begin(), bitexts.end());
      std::vector<CooccurrenceTable> tables;
      for (const auto& b : bitexts) tables.push_back(count_files({b}));
      const fs::path gold = eval_gold.empty() ? fs::path(eval_synth) / "gold.tsv" : fs::path(eval_gold);
      reports = evaluate_schemes(tables, gold_set(gold.string()), schemes, ks, jobs);
    } else if (!eval_annotated.empty()) {
      if (eval_ranked.empty()) throw Error("--annotated needs --ranked");
      auto in = open_input(eval_annotated);
      auto annotated = read_annotated_set(in);
      std::optional<SplitTarget> split = annotated.split;
      if (!eval_split.empty()) {
        const SplitTarget requested = to_split(eval_split);
        if (split && *split != requested)
          throw Error("annotated set is the " + std::string(*split == SplitTarget::dev ? "dev" : "test") +
                      " split, not " + eval_split);
        split = requested;
      }
      if (split == SplitTarget::test && !eval_final)
        throw Error("the test split is for final evaluations only; pass --final");
      const auto result = evaluate_on_annotated(load_ranked(eval_ranked), annotated.set.rows, ks);
      std::cerr << "eval: " << result.overlap << " annotated pairs ranked, " << result.not_ranked
                << " not in the ranking\n";
      reports.push_back(result.report);
    } else {
      if (eval_ranked.empty() || eval_gold.empty())
        throw Error("eval needs --ranked with --gold or --annotated, or --synth-dir");
      const auto ranked = load_ranked(eval_ranked);
      const auto gold = gold_set(eval_gold);
      const auto pairs = ranking_pairs(ranked);
      SchemeReport r{ranked.scheme, {}, std::nullopt};
      for (auto k : ks)
        r.precision.push_back(
            precision_at(pairs, k, [&](const PairKey& p) { return gold.contains(p); }));
      reports.push_back(std::move(r));
    }
    Output out(eval_out);
    write_report(out.stream(), reports);
    out.close();
  });

  // run
  std::string run_config, run_from = "synth", run_to = "eval", run_work;
  std::vector<std::string> run_set;
  std::optional<std::uint64_t> run_seed;
  std::string run_scheme;
  auto* run_cmd = app.add_subcommand("run", "Run a range of pipeline stages from a config file");
  run_cmd->add_option("--config", run_config)->required();
  run_cmd->add_option("--from", run_from);
  run_cmd->add_option("--to", run_to);
  run_cmd->add_option("--work-dir", run_work);
  run_cmd->add_option("--seed", run_seed);
  run_cmd->add_option("--scheme", run_scheme);
  run_cmd->add_option("--set", run_set, "key=value override");
  run_cmd->callback([&] {
    auto in = open_input(run_config);
    PipelineConfig config = parse_config(in, fs::path(run_config).parent_path());
    for (const auto& kv : run_set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error("--set expects key=value: " + kv);
      apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!run_work.empty()) config.work_dir = run_work;
    if (run_seed) config.seed = *run_seed;
    if (!run_scheme.empty()) config.scheme = require_scheme(run_scheme);
    if (jobs != 1) config.jobs = jobs;
    run_pipeline(config, run_from, run_to, &std::cerr);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "paramine: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
