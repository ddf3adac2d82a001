// mtplab command-line driver. Talks to the library only through the C API.
//
// Exit codes: 0 pass, 1 an assertion failed, 2 usage or input error.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtplab/mtplab.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

constexpr const char* kSeedEnv = "MTPLAB_SEED";
constexpr const char* kReferenceLine = "3,7 | 6,10 | 7,2 | 3,6 / 3,10 = 3,6,10";

struct LibError {
  mtp_status status;
  std::string message;
};

void check(mtp_status s) {
  if (s != MTP_OK) throw LibError{s, mtp_last_error()};
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring non-numeric " << kSeedEnv << "='" << env << "'\n";
    }
  }
  return 0;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// CLI11 reads config files on the root app only, so train applies its own
// flat key=value file. Options already given on the command line win.
void apply_config_file(CLI::App& sub, const std::string& path) {
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(path)) {
    CLI::Option* opt = item.parents.empty() ? sub.get_option_no_throw("--" + item.name) : nullptr;
    if (!opt || item.name == "config") throw CLI::ConfigError::Extras(item.fullname());
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

// One manifest per output directory, rewritten by each run that targets it.
class Manifest {
 public:
  Manifest(std::string command, const CLI::App& sub)
      : started_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["tool_version"] = mtp_version();
    doc_["started_utc"] = utc_now();
    for (const CLI::Option* opt : sub.get_options()) {
      const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames()[0];
      if (name == "help" || name.empty()) continue;
      const auto vals = opt->results();
      if (!vals.empty()) {
        doc_["config"][name] = vals.size() == 1 ? json(vals[0]) : json(vals);
      } else if (!opt->get_default_str().empty()) {
        doc_["config"][name] = opt->get_default_str();
      }
    }
  }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void artifact(const std::string& key, const fs::path& p) { doc_["artifacts"][key] = p.string(); }
  void result(const std::string& key, json v) { doc_["result"][key] = std::move(v); }
  void write(const fs::path& dir) {
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    std::ofstream out(dir / "manifest.json");
    out << doc_.dump(2) << '\n';
    if (!out) throw LibError{MTP_E_IO, "cannot write manifest in " + dir.string()};
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point started_;
};

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw LibError{MTP_E_IO, "cannot create " + dir + ": " + ec.message()};
  return p;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("gammas", "bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("gammas", "empty list");
  return out;
}

void print_eval(const mtp_eval_report& r) {
  std::cout << "  eval graphs        " << r.count << '\n'
            << "  v_accuracy         " << r.v_accuracy << '\n'
            << "  full_path_accuracy " << r.full_path_accuracy << '\n'
            << "  ar_step_accuracy   " << r.ar_step_accuracy << '\n'
            << "  s1_concentration   " << r.s1_concentration << '\n'
            << "  s2_concentration   " << r.s2_concentration << '\n'
            << "  loss total/L1a/L1b/L2 " << r.loss_total << ' ' << r.l1a << ' ' << r.l1b << ' '
            << r.l2 << '\n';
}

json eval_json(const mtp_eval_report& r) {
  return {{"count", r.count},           {"v_accuracy", r.v_accuracy},
          {"full_path_accuracy", r.full_path_accuracy},
          {"ar_step_accuracy", r.ar_step_accuracy},
          {"s1_concentration", r.s1_concentration},
          {"s2_concentration", r.s2_concentration},
          {"loss_total", r.loss_total}, {"L1a", r.l1a}, {"L1b", r.l1b}, {"L2", r.l2}};
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mtplab: two-layer attention lab for multi-token prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mtp_version()));
  const std::uint64_t env_seed = default_seed();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a task dataset, one instance per line");
  std::string gen_task = "star", gen_out;
  std::size_t gen_count = 100;
  std::uint64_t gen_seed = env_seed;
  mtp_gen_params gp;
  mtp_gen_params_default(&gp);
  gen->add_option("--task", gen_task, "star, tree, countdown or sat")
      ->check(CLI::IsMember({"star", "tree", "countdown", "sat"}))
      ->capture_default_str();
  gen->add_option("--count", gen_count)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "dataset file")->required();
  gen->add_option("--path-count", gp.path_count)->capture_default_str();
  gen->add_option("--path-len", gp.path_len)->capture_default_str();
  gen->add_option("--node-count", gp.node_count)->capture_default_str();
  gen->add_option("--depth", gp.depth)->capture_default_str();
  gen->add_option("--operands", gp.operand_count)->capture_default_str();

  // verify-gradients
  auto* vg = app.add_subcommand("verify-gradients", "Closed-form gradients vs finite differences");
  std::size_t vg_trials = 200;
  std::uint64_t vg_seed = env_seed;
  double vg_tol = 1e-4, vg_eps = 1e-5;
  std::string vg_out = "out/verify-gradients";
  vg->add_option("--trials", vg_trials)->capture_default_str();
  vg->add_option("--seed", vg_seed)->capture_default_str();
  vg->add_option("--tol", vg_tol)->capture_default_str();
  vg->add_option("--eps", vg_eps)->capture_default_str();
  vg->add_option("--out", vg_out, "output directory")->capture_default_str();

  // verify-circuit
  auto* vc = app.add_subcommand("verify-circuit", "Gamma sweep over the constructed circuit");
  std::string vc_gammas = "5,10,15,20,25";
  std::size_t vc_examples = 100;
  std::uint64_t vc_seed = env_seed;
  double vc_stationary = 30.0;
  std::string vc_out = "out/verify-circuit";
  vc->add_option("--gammas", vc_gammas, "comma-separated gammas")->capture_default_str();
  vc->add_option("--examples", vc_examples)->capture_default_str();
  vc->add_option("--seed", vc_seed)->capture_default_str();
  vc->add_option("--stationary-gamma", vc_stationary)->capture_default_str();
  vc->add_option("--out", vc_out, "output directory")->capture_default_str();

  // dynamics
  auto* dy = app.add_subcommand("dynamics", "Reduced gradient-flow systems");
  std::string dy_which;
  double dy_step = 0.1, dy_gamma = 800.0, dy_lr = 1.0;
  std::size_t dy_steps = 20000, dy_t = 10, dy_examples = 256, dy_max_steps = 100000;
  std::uint64_t dy_seed = env_seed;
  std::string dy_out = "out/dynamics";
  dy->add_option("which", dy_which, "phase1, phase2 or ntp-field")
      ->required()
      ->check(CLI::IsMember({"phase1", "phase2", "ntp-field"}));
  dy->add_option("--step", dy_step, "phase1 Euler step")->capture_default_str();
  dy->add_option("--steps", dy_steps, "phase1 Euler steps")->capture_default_str();
  dy->add_option("--seq-len", dy_t, "ntp-field T")->capture_default_str();
  dy->add_option("--examples", dy_examples, "phase2 graphs")->capture_default_str();
  dy->add_option("--gamma", dy_gamma, "phase2 frozen layer-1 scale")->capture_default_str();
  dy->add_option("--lr", dy_lr, "phase2 learning rate")->capture_default_str();
  dy->add_option("--max-steps", dy_max_steps, "phase2 step cap")->capture_default_str();
  dy->add_option("--seed", dy_seed)->capture_default_str();
  dy->add_option("--out", dy_out, "output directory")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Train on 2-path 3-node stars");
  std::string tr_config;
  tr->add_option("--config", tr_config, "flat key=value file; flags override it")
      ->check(CLI::ExistingFile);
  mtp_train_config tc;
  mtp_train_config_default(&tc);
  tc.seed = env_seed;
  std::string tr_objective = "mtp", tr_init = "zero", tr_data, tr_out = "out/train";
  std::size_t tr_train_count = 512, tr_eval_count = 1000;
  double tr_eval_fraction = 0.2;
  bool tr_pin = tc.pin_content1 != 0, tr_toeplitz = tc.toeplitz_phase1 != 0;
  tr->add_option("--objective", tr_objective, "mtp, mtp-no-ar, ntp or cascaded")
      ->check(CLI::IsMember({"mtp", "mtp-no-ar", "ntp", "cascaded"}))
      ->capture_default_str();
  tr->add_option("--learning-rate", tc.learning_rate)->capture_default_str();
  tr->add_option("--batch-size", tc.batch_size, "0 = full batch")->capture_default_str();
  tr->add_option("--epochs", tc.epochs)->capture_default_str();
  tr->add_option("--seed", tc.seed)->capture_default_str();
  tr->add_option("--init", tr_init, "zero or uniform")
      ->check(CLI::IsMember({"zero", "uniform"}))
      ->capture_default_str();
  tr->add_option("--init-scale", tc.init_scale)->capture_default_str();
  tr->add_option("--pin-content1", tr_pin, "hold W0_1 fixed")->capture_default_str();
  tr->add_option("--eval-every", tc.eval_every)->capture_default_str();
  tr->add_option("--gamma-phase1", tc.gamma_phase1)->capture_default_str();
  tr->add_option("--phase1-epochs", tc.phase1_epochs)->capture_default_str();
  tr->add_option("--toeplitz-phase1", tr_toeplitz)->capture_default_str();
  tr->add_option("--phase2-target", tc.phase2_target, "cascaded: per-example S2 mass to stop at")
      ->capture_default_str();
  tr->add_option("--data", tr_data, "graph file; generated when omitted");
  tr->add_option("--eval-fraction", tr_eval_fraction, "held-out share of --data")
      ->capture_default_str();
  tr->add_option("--train-count", tr_train_count, "generated train graphs")->capture_default_str();
  tr->add_option("--eval-count", tr_eval_count, "generated eval graphs")->capture_default_str();
  tr->add_option("--out", tr_out, "output directory")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on held-out stars");
  std::string ev_ckpt, ev_data, ev_out;
  double ev_circuit = -1.0, ev_eval_fraction = 0.2;
  std::size_t ev_count = 1000;
  std::uint64_t ev_seed = env_seed;
  auto* ev_ck = ev->add_option("--checkpoint", ev_ckpt);
  auto* ev_cg = ev->add_option("--circuit-gamma", ev_circuit, "evaluate the constructed circuit");
  ev_ck->excludes(ev_cg);
  ev->add_option("--data", ev_data, "graph file; generated when omitted");
  ev->add_option("--eval-fraction", ev_eval_fraction)->capture_default_str();
  ev->add_option("--eval-count", ev_count)->capture_default_str();
  ev->add_option("--seed", ev_seed)->capture_default_str();
  ev->add_option("--out", ev_out, "output directory (optional)");

  // heatmap
  auto* hm = app.add_subcommand("heatmap", "Attention maps of one graph as CSV (+ SVG)");
  std::string hm_ckpt, hm_line = kReferenceLine, hm_out = "out/heatmap";
  double hm_circuit = -1.0;
  bool hm_svg = false;
  auto* hm_ck = hm->add_option("--checkpoint", hm_ckpt);
  auto* hm_cg = hm->add_option("--circuit-gamma", hm_circuit, "use the constructed circuit");
  hm_ck->excludes(hm_cg);
  hm->add_option("--instance", hm_line, "graph line, start-first prompt")->capture_default_str();
  hm->add_option("--out", hm_out, "output directory")->capture_default_str();
  hm->add_flag("--svg", hm_svg, "also write attention.svg");

  try {
    app.parse(argc, argv);
    if (*tr && !tr_config.empty()) apply_config_file(*tr, tr_config);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  auto load_model = [](const std::string& ckpt, double gamma) {
    mtp_model* m = nullptr;
    if (!ckpt.empty()) {
      check(mtp_model_load(ckpt.c_str(), &m));
    } else if (gamma >= 0.0) {
      check(mtp_model_circuit(gamma, 10, 10, &m));
    } else {
      throw CLI::ValidationError("model", "give --checkpoint or --circuit-gamma");
    }
    return m;
  };

  try {
    if (*gen) {
      Manifest man("gen", *gen);
      man.seed(gen_seed);
      const fs::path out(gen_out);
      if (out.has_parent_path()) ensure_dir(out.parent_path().string());
      mtp_gen_summary s{};
      check(mtp_generate(gen_task.c_str(), &gp, gen_count, gen_seed, gen_out.c_str(), &s));
      std::cout << "wrote " << s.count << ' ' << gen_task << " instances to " << gen_out << '\n'
                << "  mean size   " << s.mean_size << '\n'
                << "  mean answer " << s.mean_answer << '\n'
                << "  verified    " << s.verified << '/' << s.count << '\n';
      man.artifact("dataset", out);
      man.result("verified", s.verified);
      man.write(out.has_parent_path() ? out.parent_path() : fs::path("."));
      return s.verified == s.count ? kPass : kFail;
    }

    if (*vg) {
      const auto dir = ensure_dir(vg_out);
      Manifest man("verify-gradients", *vg);
      man.seed(vg_seed);
      mtp_grad_summary s{};
      check(mtp_check_gradients(vg_trials, vg_seed, vg_tol, vg_eps,
                                (dir / "grad_check.csv").c_str(), &s));
      const char* names[4] = {"W0_1", "W1_1", "W0_2", "W1_2"};
      std::cout << "trials passed " << s.passed << '/' << s.trials << '\n';
      for (int k = 0; k < 4; ++k)
        std::cout << "  " << names[k] << " worst rel err " << s.worst_rel_err[k] << '\n';
      std::cout << "  shallow layer-2 max " << s.shallow_layer2_max << '\n';
      const bool ok = s.passed == s.trials && s.shallow_layer2_max == 0.0;
      std::cout << verdict(ok) << '\n';
      man.artifact("report", dir / "grad_check.csv");
      man.result("pass", ok);
      man.write(dir);
      return ok ? kPass : kFail;
    }

    if (*vc) {
      const auto dir = ensure_dir(vc_out);
      Manifest man("verify-circuit", *vc);
      man.seed(vc_seed);
      const auto gammas = parse_list(vc_gammas);
      mtp_circuit_summary s{};
      check(mtp_verify_circuit(gammas.data(), gammas.size(), vc_examples, vc_seed, vc_stationary,
                               (dir / "sweep.csv").c_str(), &s));
      std::cout << "log(total loss) slope  " << s.loss_slope << "  " << verdict(s.loss_decays)
                << '\n'
                << "log(grad max) slope    " << s.grad_slope << "  " << verdict(s.grad_decays)
                << '\n'
                << "total loss monotone    " << verdict(s.loss_monotone) << '\n'
                << "without AR term: loss slope " << s.noar_loss_slope << ", grad slope "
                << s.noar_grad_slope << '\n'
                << "at gamma " << s.stationary_gamma << ":\n"
                << "  attention conditions " << verdict(s.conditions_hold) << '\n'
                << "  max grad_total       " << s.max_grad_total << '\n'
                << "  max grad without AR  " << s.max_grad_noar << '\n'
                << "  min L1b              " << s.min_l1b << '\n'
                << "  AR step returns v    " << s.ar_collapse_rate << '\n'
                << "  stationarity => small gradient " << verdict(s.implication_holds) << '\n'
                << verdict(s.pass) << '\n';
      man.artifact("sweep", dir / "sweep.csv");
      man.result("loss_slope", s.loss_slope);
      man.result("grad_slope", s.grad_slope);
      man.result("pass", static_cast<bool>(s.pass));
      man.write(dir);
      return s.pass ? kPass : kFail;
    }

    if (*dy) {
      const auto dir = ensure_dir(dy_out);
      Manifest man("dynamics " + dy_which, *dy);
      man.seed(dy_seed);
      bool ok = false;
      if (dy_which == "phase1") {
        mtp_phase1_summary s{};
        const auto csv = dir / "phase1.csv";
        check(mtp_dynamics_phase1(dy_step, dy_steps, dy_seed, csv.c_str(), &s));
        std::cout << std::setprecision(17) << "gap rate at zero " << s.gap_at_zero
                  << " (7/16 = " << 7.0 / 16.0 << ")\n"
                  << std::setprecision(6) << "final s_p " << s.final_s_p << '\n'
                  << "first step with s_p >= 0.999: "
                  << (s.first_step_reaching ? std::to_string(s.first_step_reaching) : "never")
                  << '\n'
                  << "gap rate positive for x >= 1: " << verdict(s.gap_positive) << '\n';
        ok = s.pass;
        man.artifact("trajectory", csv);
      } else if (dy_which == "ntp-field") {
        mtp_ntp_field_summary s{};
        const auto csv = dir / "ntp_field.csv";
        check(mtp_dynamics_ntp_field(dy_t, csv.c_str(), &s));
        std::cout << "mu0 " << s.mu0 << '\n';
        for (std::size_t k = 1; k < dy_t; ++k)
          std::cout << "  w(" << k << ") closed " << s.closed[k - 1] << "  enumerated "
                    << s.empirical[k - 1] << '\n';
        std::cout << "worst relative gap " << s.worst_rel_err << '\n'
                  << "sign pattern " << verdict(s.signs_ok) << '\n';
        if (s.constants_ok >= 0) std::cout << "exact constants " << verdict(s.constants_ok) << '\n';
        ok = s.pass;
        man.artifact("field", csv);
      } else {
        mtp_phase2_summary s{};
        const auto csv = dir / "phase2.csv";
        check(mtp_dynamics_phase2(dy_examples, dy_seed, dy_gamma, dy_lr, dy_max_steps, csv.c_str(),
                                  &s));
        std::cout << "steps " << s.steps << (s.converged ? " (converged)" : " (cap reached)")
                  << '\n'
                  << "final mean s2 mass " << s.final_s2_mass << '\n'
                  << "W0_2 diagonal strictly increasing " << verdict(s.diag_increasing) << '\n'
                  << "W0_2 off-diagonal negative, bounded "
                  << verdict(s.offdiag_negative && s.offdiag_bounded) << '\n'
                  << "self-mask strictly decreasing " << verdict(s.self_mask_decreasing)
                  << " (falls monotonically from step " << s.self_mask_peak_step << ")\n"
                  << "W1_2 untouched outside its row " << verdict(s.outside_row_zero) << '\n'
                  << "rank-1 per-example gradients "
                  << verdict(s.rank1_positional && s.rank1_content) << '\n'
                  << "content matching on every graph " << verdict(s.content_match) << '\n';
        ok = s.pass;
        man.artifact("trajectory", csv);
      }
      std::cout << verdict(ok) << '\n';
      man.result("pass", ok);
      man.write(dir);
      return ok ? kPass : kFail;
    }

    if (*tr) {
      const auto dir = ensure_dir(tr_out);
      Manifest man("train", *tr);
      man.seed(tc.seed);
      check(mtp_objective_from_name(tr_objective.c_str(), &tc.objective));
      tc.init_uniform = tr_init == "uniform";
      tc.pin_content1 = tr_pin;
      tc.toeplitz_phase1 = tr_toeplitz;
      mtp_dataset* data = nullptr;
      if (tr_data.empty()) {
        check(mtp_dataset_generate(tr_train_count, tr_eval_count, tc.seed, &data));
      } else {
        check(mtp_dataset_read(tr_data.c_str(), tr_eval_fraction, &data));
      }
      std::unique_ptr<mtp_dataset, decltype(&mtp_dataset_free)> data_guard(data, mtp_dataset_free);
      mtp_model* model = nullptr;
      mtp_train_summary s{};
      const auto metrics = dir / "metrics.csv";
      check(mtp_train(&tc, data, metrics.c_str(), &model, &s));
      std::unique_ptr<mtp_model, decltype(&mtp_model_free)> model_guard(model, mtp_model_free);
      const auto ckpt = dir / "model.ckpt";
      check(mtp_model_save(model, ckpt.c_str()));
      std::cout << "objective " << tr_objective << ", " << s.records << " metric records"
                << (s.diverged ? ", DIVERGED" : "") << '\n';
      print_eval(s.final_eval);
      if (tc.objective == MTP_OBJ_CASCADED)
        std::cout << "  phase I s1 " << s.phase1_s1_concentration << ", phase II converged "
                  << s.phase2_converged << ", rank-1 " << s.phase2_rank1 << '\n';
      man.artifact("metrics", metrics);
      man.artifact("checkpoint", ckpt);
      man.result("final_eval", eval_json(s.final_eval));
      man.result("diverged", static_cast<bool>(s.diverged));
      man.write(dir);
      return s.diverged ? kFail : kPass;
    }

    if (*ev) {
      mtp_model* model = load_model(ev_ckpt, ev_circuit);
      std::unique_ptr<mtp_model, decltype(&mtp_model_free)> model_guard(model, mtp_model_free);
      mtp_dataset* data = nullptr;
      if (ev_data.empty()) {
        check(mtp_dataset_generate(0, ev_count, ev_seed, &data));
      } else {
        check(mtp_dataset_read(ev_data.c_str(), ev_eval_fraction, &data));
      }
      std::unique_ptr<mtp_dataset, decltype(&mtp_dataset_free)> data_guard(data, mtp_dataset_free);
      mtp_eval_report r{};
      check(mtp_evaluate(model, data, &r));
      print_eval(r);
      if (!ev_out.empty()) {
        const auto dir = ensure_dir(ev_out);
        Manifest man("eval", *ev);
        man.seed(ev_seed);
        std::ofstream(dir / "eval.json") << eval_json(r).dump(2) << '\n';
        man.artifact("report", dir / "eval.json");
        man.write(dir);
      }
      return kPass;
    }

    if (*hm) {
      const auto dir = ensure_dir(hm_out);
      Manifest man("heatmap", *hm);
      mtp_model* model = load_model(hm_ckpt, hm_circuit);
      std::unique_ptr<mtp_model, decltype(&mtp_model_free)> model_guard(model, mtp_model_free);
      const auto csv = dir / "attention.csv";
      const auto svg = dir / "attention.svg";
      double mass = 0.0;
      check(mtp_heatmap(model, hm_line.c_str(), csv.c_str(), hm_svg ? svg.c_str() : nullptr,
                        &mass));
      std::cout << "S2 last-row mass on the context end token " << mass << '\n';
      man.artifact("csv", csv);
      if (hm_svg) man.artifact("svg", svg);
      man.result("s2_mass_at_end", mass);
      man.write(dir);
      return kPass;
    }
  } catch (const LibError& e) {
    std::cerr << "error (" << mtp_status_name(e.status) << "): " << e.message << '\n';
    switch (e.status) {
      case MTP_E_SINGULAR_LOSS:
      case MTP_E_EVALUATION:
      case MTP_E_INTEGRATION:
      case MTP_E_DIVERGENCE:
      case MTP_E_INTERNAL:
        return kFail;
      default:
        return kUsage;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
