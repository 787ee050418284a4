#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "docnav/agents.hpp"
#include "docnav/bridge.hpp"
#include "docnav/corpus.hpp"
#include "docnav/environment.hpp"
#include "docnav/metrics.hpp"
#include "docnav/overview.hpp"
#include "docnav/png_io.hpp"
#include "docnav/rewards.hpp"
#include "docnav/trainpipe.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace docnav;

namespace {

// Everything a run depends on, resolved as flags > config file > defaults.
struct RunSettings {
  std::string corpus;
  std::string agent = "oracle";
  std::string retriever = "bm25";
  std::string image_mode = "path";
  int max_turns = 8;
  int group_capacity = kDefaultGroupCapacity;
  int header_height = kDefaultHeaderHeight;
  double w_ans = 0.6, w_evi = 0.3, w_fmt = 0.1;
  double tau = 0.5;
  double tau_anls = 0.7;
  double eps = 1e-8;
  double eps_clip = 0.2;
  double bm25_k1 = 1.2, bm25_b = 0.75;
  std::uint64_t seed = 0;
  int jobs = 1;
  int timeout_ms = 30000;

  EnvConfig env_config() const { return {max_turns, group_capacity, header_height, "Page {}:"}; }
  RewardWeights weights() const { return {w_ans, w_evi, w_fmt}; }

  // Semantic knobs only; output paths stay out so identical runs to
  // different files still produce identical bytes.
  json echo() const {
    json j;
    j["corpus"] = corpus;
    j["agent"] = agent;
    j["retriever"] = retriever;
    j["max_turns"] = max_turns;
    j["G"] = group_capacity;
    j["h"] = header_height;
    j["weights"] = {{"ans", w_ans}, {"evi", w_evi}, {"fmt", w_fmt}};
    j["tau"] = tau;
    j["tau_anls"] = tau_anls;
    j["eps"] = eps;
    j["eps_clip"] = eps_clip;
    j["bm25"] = {{"k1", bm25_k1}, {"b", bm25_b}};
    j["seed"] = seed;
    j["jobs"] = jobs;
    return j;
  }
};

void apply_config_file(RunSettings& s, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  json j;
  in >> j;
  s.agent = j.value("agent", s.agent);
  s.retriever = j.value("retriever", s.retriever);
  s.image_mode = j.value("image_mode", s.image_mode);
  s.max_turns = j.value("max_turns", s.max_turns);
  s.group_capacity = j.value("G", s.group_capacity);
  s.header_height = j.value("h", s.header_height);
  if (j.contains("weights")) {
    s.w_ans = j["weights"].value("ans", s.w_ans);
    s.w_evi = j["weights"].value("evi", s.w_evi);
    s.w_fmt = j["weights"].value("fmt", s.w_fmt);
  }
  s.tau = j.value("tau", s.tau);
  s.tau_anls = j.value("tau_anls", s.tau_anls);
  s.eps = j.value("eps", s.eps);
  s.eps_clip = j.value("eps_clip", s.eps_clip);
  if (j.contains("bm25")) {
    s.bm25_k1 = j["bm25"].value("k1", s.bm25_k1);
    s.bm25_b = j["bm25"].value("b", s.bm25_b);
  }
  s.seed = j.value("seed", s.seed);
  s.jobs = j.value("jobs", s.jobs);
  s.timeout_ms = j.value("timeout_ms", s.timeout_ms);
}

std::shared_ptr<RetrieverFactory> make_retriever_factory(const RunSettings& s) {
  const std::string& spec = s.retriever;
  if (spec == "bm25") return std::make_shared<Bm25Factory>(Bm25Params{s.bm25_k1, s.bm25_b});
  if (spec == "oracle") return std::make_shared<OracleRetrieverFactory>();
  if (spec.rfind("noisy:", 0) == 0) {
    const std::string rest = spec.substr(6);
    const auto colon = rest.find(':');
    const double flip = std::stod(rest.substr(0, colon));
    const std::uint64_t seed =
        colon == std::string::npos ? s.seed : std::stoull(rest.substr(colon + 1));
    return std::make_shared<NoisyRetrieverFactory>(
        std::make_shared<Bm25Factory>(Bm25Params{s.bm25_k1, s.bm25_b}), flip, seed);
  }
  if (spec.rfind("bridge:", 0) == 0) {
    return std::make_shared<BridgeRetrieverFactory>(spec.substr(7), s.timeout_ms);
  }
  throw CLI::ValidationError("--retriever",
                             "expected bm25 | oracle | noisy:<p>[:<seed>] | bridge:<endpoint>");
}

std::shared_ptr<AgentFactory> make_agent_factory(const RunSettings& s) {
  const std::string& spec = s.agent;
  if (spec == "oracle") return std::make_shared<OracleAgentFactory>();
  if (spec == "greedy") return std::make_shared<GreedyAgentFactory>();
  if (spec == "random") return std::make_shared<RandomAgentFactory>(s.seed);
  if (spec.rfind("random:", 0) == 0) {
    return std::make_shared<RandomAgentFactory>(std::stoull(spec.substr(7)));
  }
  if (spec.rfind("bridge:", 0) == 0) {
    const ImageMode mode = s.image_mode == "b64" ? ImageMode::Base64 : ImageMode::Path;
    return std::make_shared<BridgeAgentFactory>(spec.substr(7), mode, s.timeout_ms);
  }
  throw CLI::ValidationError("--agent", "expected oracle | greedy | random[:<seed>] | bridge:<endpoint>");
}

void add_common_options(CLI::App* cmd, RunSettings& s, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file (flags override it)");
  cmd->add_option("--max-steps", s.max_turns, "interaction budget T");
  cmd->add_option("--group-capacity", s.group_capacity, "overview pages per grid (G)");
  cmd->add_option("--header-height", s.header_height, "overview header band height (h)");
  cmd->add_option("--w-ans", s.w_ans, "answer reward weight");
  cmd->add_option("--w-evi", s.w_evi, "evidence reward weight");
  cmd->add_option("--w-fmt", s.w_fmt, "format reward weight");
  cmd->add_option("--tau", s.tau, "answer reward similarity threshold");
  cmd->add_option("--seed", s.seed, "base RNG seed");
}

int cmd_synth(const SynthSpec& spec, const std::string& out_dir) {
  const Corpus corpus = synth_corpus(spec);
  write_corpus(corpus, out_dir);
  long long pages = 0;
  for (const auto& [_, doc] : corpus.documents) pages += doc.page_count();
  int answerable = 0;
  for (const auto& qa : corpus.qa_items) answerable += qa.answer_kind != AnswerKind::Unanswerable;
  std::cout << "wrote " << corpus.documents.size() << " docs, " << pages << " pages, "
            << corpus.qa_items.size() << " qa items (" << answerable << " answerable) to " << out_dir
            << "\n";
  return 0;
}

int cmd_overview(const std::string& corpus_dir, const std::string& out_dir, const std::string& doc_id,
                 int group_capacity, int header_height) {
  const Corpus corpus = load_corpus(corpus_dir);
  std::vector<const Document*> docs;
  if (doc_id.empty()) {
    for (const auto& [_, doc] : corpus.documents) docs.push_back(&doc);
  } else {
    docs.push_back(&corpus.document(doc_id));
  }
  for (const Document* doc : docs) {
    const fs::path dir = fs::path(out_dir) / doc->doc_id;
    fs::create_directories(dir);
    const OverviewSet set = build_overview(*doc, group_capacity, header_height);
    for (const OverviewImage& img : set.images) {
      const std::string stem = "overview_" + std::to_string(img.group_index);
      png_write((dir / (stem + ".png")).string(), img.render());
      json sidecar;
      sidecar["k"] = img.group_index;
      sidecar["rows"] = img.rows;
      sidecar["cols"] = img.cols;
      sidecar["header_height"] = img.header_height;
      sidecar["cells"] = json::array();
      for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
          const auto page = img.page_at(r, c);
          sidecar["cells"].push_back(
              {{"row", r}, {"col", c}, {"page", page ? json(*page) : json()}});
        }
      }
      std::ofstream side(dir / (stem + ".json"), std::ios::trunc);
      side << sidecar.dump(2) << "\n";
    }
    std::cout << doc->doc_id << ": " << set.image_count() << " overview image(s), "
              << overview_token_cost(set) << " tokens\n";
  }
  return 0;
}

int cmd_run(const RunSettings& s, const std::string& out_path) {
  const Corpus corpus = load_corpus(s.corpus);
  if (corpus.qa_items.empty()) {
    std::cerr << "run: corpus has no qa items\n";
    return 2;
  }
  auto agents = make_agent_factory(s);
  auto retrievers = make_retriever_factory(s);
  const EnvConfig env_config = s.env_config();
  const json config_echo = s.echo();

  std::vector<std::string> lines(corpus.qa_items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> transport_failed{false};
  std::vector<std::string> worker_errors(static_cast<std::size_t>(std::max(1, s.jobs)));

  auto worker = [&](std::size_t worker_id) {
    try {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= corpus.qa_items.size()) break;
        const QAItem& qa = corpus.qa_items[i];
        const Document& doc = corpus.document(qa.doc_id);
        auto agent = agents->make(doc, qa);
        auto retriever = retrievers->make(doc, qa);
        const Trajectory traj = run_episode(doc, qa, *agent, *retriever, env_config);
        if (traj.transport_error) transport_failed = true;
        const RewardBreakdown reward = total_reward(traj, qa, s.weights(), s.tau);
        json extra;
        extra["reward"] = {{"ans", reward.r_ans},
                           {"evi", reward.r_evi},
                           {"fmt", reward.r_fmt},
                           {"total", reward.total}};
        extra["config"] = config_echo;
        lines[i] = trajectory_to_jsonl(traj, extra);
      }
    } catch (const std::exception& e) {
      worker_errors[worker_id] = e.what();
    }
  };

  if (s.jobs <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < s.jobs; ++w) threads.emplace_back(worker, static_cast<std::size_t>(w));
    for (auto& t : threads) t.join();
  }
  for (const auto& err : worker_errors) {
    if (!err.empty()) {
      std::cerr << "run: " << err << "\n";
      return 2;
    }
  }

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "run: cannot write " << out_path << "\n";
    return 2;
  }
  for (const auto& line : lines) out << line << "\n";
  std::cout << "wrote " << lines.size() << " episodes to " << out_path << "\n";
  return transport_failed ? 1 : 0;
}

std::vector<Trajectory> read_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Trajectory> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(trajectory_from_jsonl(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

int cmd_eval(const RunSettings& s, const std::string& traj_path, const std::string& report_path,
             const std::string& predictions_path) {
  const Corpus corpus = load_corpus(s.corpus);
  const auto trajectories = read_trajectories(traj_path);
  if (trajectories.empty()) {
    std::cerr << "eval: no trajectories in " << traj_path << "\n";
    return 2;
  }
  std::vector<EpisodeRecord> records;
  records.reserve(trajectories.size());
  for (const Trajectory& traj : trajectories) {
    records.push_back(make_episode_record(traj, corpus, s.env_config(), s.weights(), s.tau));
  }
  const Report report = aggregate(records);

  std::ofstream rep(report_path, std::ios::binary | std::ios::trunc);
  rep << report_to_json(report, s.echo());
  std::ofstream pred(predictions_path, std::ios::binary | std::ios::trunc);
  for (const EpisodeRecord& record : records) pred << prediction_to_jsonl(record) << "\n";

  std::cout << "episodes=" << report.episodes << " answer=" << report.mean_answer_score
            << " accuracy=" << report.accuracy << " page_f1=" << report.mean_page_f1.f1
            << " avg_pages=" << report.avg_pages << " avg_turns=" << report.avg_turns
            << " avg_tokens=" << report.avg_tokens << "\n";
  return 0;
}

int cmd_filter(const RunSettings& s, const std::string& traj_path, const std::string& kept_path,
               const std::string& rejected_path) {
  const Corpus corpus = load_corpus(s.corpus);
  std::map<std::string, const QAItem*> qa_by_id;
  for (const QAItem& qa : corpus.qa_items) qa_by_id[qa.qa_id] = &qa;

  std::ifstream in(traj_path);
  if (!in) {
    std::cerr << "filter: cannot open " << traj_path << "\n";
    return 2;
  }
  std::ofstream kept(kept_path, std::ios::binary | std::ios::trunc);
  std::ofstream rejected(rejected_path, std::ios::binary | std::ios::trunc);
  std::string line;
  int n_kept = 0, n_rejected = 0, lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json extra;
    Trajectory traj;
    try {
      traj = trajectory_from_jsonl(line, &extra);
    } catch (const std::exception& e) {
      std::cerr << "filter: " << traj_path << " line " << lineno << ": " << e.what() << "\n";
      return 2;
    }
    const auto qa_it = qa_by_id.find(traj.qa_id);
    if (qa_it == qa_by_id.end()) {
      std::cerr << "filter: unknown qa_id " << traj.qa_id << " at line " << lineno << "\n";
      return 2;
    }
    const FilterDecision decision = filter_trajectory(traj, *qa_it->second, s.tau_anls);
    extra["filter"] = {{"keep", decision.keep},
                       {"reason", to_string(decision.reason)},
                       {"scores",
                        {{"anls", decision.scores.anls},
                         {"em", decision.scores.em},
                         {"overlap", decision.scores.overlap}}}};
    (decision.keep ? kept : rejected) << trajectory_to_jsonl(traj, extra) << "\n";
    (decision.keep ? n_kept : n_rejected) += 1;
  }
  std::cout << "kept " << n_kept << ", rejected " << n_rejected << "\n";
  return 0;
}

int cmd_grpo(const std::string& groups_path, const std::string& out_path, double clip_eps,
             double eps) {
  std::ifstream in(groups_path);
  if (!in) {
    std::cerr << "grpo: cannot open " << groups_path << "\n";
    return 2;
  }
  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    out_file.open(out_path, std::ios::binary | std::ios::trunc);
    out = &out_file;
  }

  std::string line;
  int lineno = 0, groups = 0;
  double objective_sum = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto rewards = j.at("rewards").get<std::vector<double>>();
      const json& tokens = j.at("tokens");
      const auto logp_new = tokens.at("logp_new").get<std::vector<std::vector<double>>>();
      const auto logp_old = tokens.at("logp_old").get<std::vector<std::vector<double>>>();
      const auto mask = tokens.at("mask").get<std::vector<std::vector<int>>>();
      if (logp_new.size() != rewards.size() || logp_old.size() != rewards.size() ||
          mask.size() != rewards.size()) {
        throw std::runtime_error("rewards/tokens member counts disagree");
      }
      TokenBatch batch;
      for (std::size_t i = 0; i < rewards.size(); ++i) {
        TokenSeq seq;
        seq.logp_new = logp_new[i];
        seq.logp_old = logp_old[i];
        for (int m : mask[i]) seq.mask.push_back(static_cast<std::uint8_t>(m != 0));
        seq.group = 0;
        batch.seqs.push_back(std::move(seq));
      }
      const auto advantages = group_advantages(rewards, eps);
      const double objective = grpo_objective(batch, advantages, clip_eps);
      json result;
      result["group_id"] = j.value("group_id", json(lineno));
      result["advantages"] = advantages;
      result["objective"] = objective;
      (*out) << result.dump() << "\n";
      objective_sum += objective;
      ++groups;
    } catch (const std::exception& e) {
      std::cerr << "grpo: " << groups_path << " line " << lineno << ": " << e.what() << "\n";
      return 2;
    }
  }
  if (groups == 0) {
    std::cerr << "grpo: no groups in " << groups_path << "\n";
    return 2;
  }
  std::cerr << "groups=" << groups << " mean_objective=" << objective_sum / groups << "\n";
  return 0;
}

int cmd_inspect(const std::string& traj_path, const std::string& qa_id, int line_no) {
  std::ifstream in(traj_path);
  if (!in) {
    std::cerr << "inspect: cannot open " << traj_path << "\n";
    return 2;
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line_no > 0 && lineno != line_no) continue;
    json extra;
    const Trajectory traj = trajectory_from_jsonl(line, &extra);
    if (!qa_id.empty() && traj.qa_id != qa_id) continue;

    std::cout << "qa_id: " << traj.qa_id << "  doc_id: " << traj.doc_id << "  budget: " << traj.budget
              << "\n";
    std::cout << "terminated_by: " << to_string(traj.terminated_by);
    if (traj.final_answer) std::cout << "  final_answer: \"" << *traj.final_answer << "\"";
    std::cout << "\n";
    if (traj.transport_error) std::cout << "transport_error: " << *traj.transport_error << "\n";
    if (extra.contains("reward")) std::cout << "reward: " << extra["reward"].dump() << "\n";
    for (const TrajectoryTurn& rec : traj.turns) {
      std::cout << "-- turn " << rec.t << " --\n";
      if (rec.parsed) {
        const Action& action = rec.parsed->action;
        std::cout << "  action: " << action_type(action);
        if (const auto* r = std::get_if<RetrievalAction>(&action)) {
          std::cout << " \"" << r->query << "\"";
        } else if (const auto* f = std::get_if<FetchAction>(&action)) {
          std::cout << " [";
          for (std::size_t i = 0; i < f->indices.size(); ++i) {
            std::cout << (i ? "," : "") << f->indices[i];
          }
          std::cout << "]";
        } else {
          std::cout << " \"" << std::get<AnswerAction>(action).text << "\"";
        }
        std::cout << "\n";
        if (rec.parsed->think.relevant_pages) {
          std::cout << "  relevant_pages:";
          for (int p : *rec.parsed->think.relevant_pages) std::cout << " " << p;
          std::cout << "\n";
        }
        std::cout << "  summary: " << rec.parsed->think.summary << "\n";
      } else {
        std::cout << "  action: invalid (" << rec.parse_error.value_or("unparsed") << ")\n";
      }
      if (!rec.feedback.pages.empty()) {
        std::cout << "  delivered:";
        for (int p : rec.feedback.pages) std::cout << " " << p;
        std::cout << "\n";
      }
      for (const auto& reminder : rec.feedback.reminders) std::cout << "  reminder: " << reminder << "\n";
      if (rec.feedback.format_notice) std::cout << "  format_notice: " << *rec.feedback.format_notice << "\n";
    }
    return 0;
  }
  std::cerr << "inspect: no matching trajectory\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop harness for multi-page document QA agents"};
  app.require_subcommand(1);

  // synth
  SynthSpec synth_spec;
  std::string synth_out;
  std::string pages_range = "12:12";
  std::string page_size = "512x640";
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", synth_out, "output corpus directory")->required();
  synth->add_option("--docs", synth_spec.n_docs, "number of documents");
  synth->add_option("--pages", pages_range, "pages per doc, MIN:MAX");
  synth->add_option("--facts", synth_spec.facts_per_doc, "qa items per doc");
  synth->add_option("--multi-hop", synth_spec.multi_hop_fraction, "fraction of answerable items with 2 evidence pages");
  synth->add_option("--unanswerable", synth_spec.unanswerable_fraction, "fraction of items without evidence");
  synth->add_option("--seed", synth_spec.rng_seed, "rng seed");
  synth->add_option("--page-size", page_size, "page pixels, WxH");

  // overview
  std::string ov_corpus, ov_out, ov_doc;
  int ov_g = kDefaultGroupCapacity, ov_h = kDefaultHeaderHeight;
  auto* overview = app.add_subcommand("overview", "render thumbnail overview grids");
  overview->add_option("--corpus", ov_corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  overview->add_option("--out", ov_out, "output directory")->required();
  overview->add_option("--doc", ov_doc, "doc id (default: all)");
  overview->add_option("--group-capacity", ov_g, "pages per grid (G)");
  overview->add_option("--header-height", ov_h, "header band height (h)");

  // run
  RunSettings run_s;
  std::string run_config, run_out;
  auto* run = app.add_subcommand("run", "run episodes over a corpus");
  run->add_option("--corpus", run_s.corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  run->add_option("--out", run_out, "trajectory JSONL output")->required();
  run->add_option("--agent", run_s.agent, "oracle | greedy | random[:<seed>] | bridge:<endpoint>");
  run->add_option("--retriever", run_s.retriever, "bm25 | oracle | noisy:<p>[:<seed>] | bridge:<endpoint>");
  run->add_option("--image-mode", run_s.image_mode, "bridge images: path | b64");
  run->add_option("--jobs", run_s.jobs, "parallel episodes");
  run->add_option("--timeout-ms", run_s.timeout_ms, "bridge per-turn timeout");
  run->add_option("--bm25-k1", run_s.bm25_k1, "BM25 k1");
  run->add_option("--bm25-b", run_s.bm25_b, "BM25 b");
  add_common_options(run, run_s, run_config);

  // eval
  RunSettings eval_s;
  std::string eval_config, eval_traj, eval_report = "report.json", eval_pred = "predictions.jsonl";
  auto* eval = app.add_subcommand("eval", "score trajectories against a corpus");
  eval->add_option("--corpus", eval_s.corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--traj", eval_traj, "trajectory JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--report", eval_report, "report JSON output");
  eval->add_option("--predictions", eval_pred, "predictions JSONL output");
  add_common_options(eval, eval_s, eval_config);

  // filter
  RunSettings filter_s;
  std::string filter_config, filter_traj, filter_kept = "kept.jsonl", filter_rejected = "rejected.jsonl";
  auto* filter = app.add_subcommand("filter", "imitation-data gates over trajectories");
  filter->add_option("--corpus", filter_s.corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  filter->add_option("--traj", filter_traj, "trajectory JSONL")->required()->check(CLI::ExistingFile);
  filter->add_option("--kept", filter_kept, "kept JSONL output");
  filter->add_option("--rejected", filter_rejected, "rejected JSONL output");
  filter->add_option("--tau-anls", filter_s.tau_anls, "answer gate threshold");
  filter->add_option("--config", filter_config, "JSON config file");

  // grpo
  std::string grpo_groups, grpo_out;
  double grpo_clip = 0.2, grpo_eps = 1e-8;
  auto* grpo = app.add_subcommand("grpo", "group advantages and clipped objective");
  grpo->add_option("--groups", grpo_groups, "groups JSONL")->required()->check(CLI::ExistingFile);
  grpo->add_option("--out", grpo_out, "output JSONL (default stdout)");
  grpo->add_option("--clip", grpo_clip, "clip range eps_c");
  grpo->add_option("--eps", grpo_eps, "advantage denominator epsilon");

  // inspect
  std::string ins_traj, ins_qa;
  int ins_line = 0;
  auto* inspect = app.add_subcommand("inspect", "pretty-print one trajectory");
  inspect->add_option("--traj", ins_traj, "trajectory JSONL")->required()->check(CLI::ExistingFile);
  inspect->add_option("--qa-id", ins_qa, "select by qa id");
  inspect->add_option("--line", ins_line, "select by 1-based line number");

  // Precedence: flags > config file > defaults. The config file is applied
  // before parsing, so explicitly passed flags override its values.
  try {
    for (int i = 1; i + 1 < argc; ++i) {
      if (std::string(argv[i]) == "--config") {
        apply_config_file(run_s, argv[i + 1]);
        apply_config_file(eval_s, argv[i + 1]);
        apply_config_file(filter_s, argv[i + 1]);
        break;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const auto colon = pages_range.find(':');
      synth_spec.pages_min = std::stoi(pages_range.substr(0, colon));
      synth_spec.pages_max =
          colon == std::string::npos ? synth_spec.pages_min : std::stoi(pages_range.substr(colon + 1));
      const auto x = page_size.find('x');
      if (x != std::string::npos) {
        synth_spec.page_width = std::stoi(page_size.substr(0, x));
        synth_spec.page_height = std::stoi(page_size.substr(x + 1));
      }
      return cmd_synth(synth_spec, synth_out);
    }
    if (*overview) return cmd_overview(ov_corpus, ov_out, ov_doc, ov_g, ov_h);
    if (*run) return cmd_run(run_s, run_out);
    if (*eval) return cmd_eval(eval_s, eval_traj, eval_report, eval_pred);
    if (*filter) return cmd_filter(filter_s, filter_traj, filter_kept, filter_rejected);
    if (*grpo) return cmd_grpo(grpo_groups, grpo_out, grpo_clip, grpo_eps);
    if (*inspect) return cmd_inspect(ins_traj, ins_qa, ins_line);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
