#include "mtplab/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mtplab/error.hpp"
#include "text.hpp"

namespace mtplab {

ContentMatrix::ContentMatrix(std::vector<NodeId> tokens, std::size_t vocab)
    : tokens_(std::move(tokens)), vocab_(vocab) {
  for (NodeId t : tokens_) {
    if (t < 1 || t > vocab_) {
      throw Error(Errc::encoding, "token " + std::to_string(t) + " outside [1.." +
                                      std::to_string(vocab_) + "]");
    }
  }
}

ContentMatrix ContentMatrix::with_token(std::size_t t, NodeId label) const {
  auto tokens = tokens_;
  tokens.at(t) = label;
  return ContentMatrix(std::move(tokens), vocab_);
}

Matrix ContentMatrix::dense() const {
  Matrix z(tokens_.size(), vocab_);
  for (std::size_t t = 0; t < tokens_.size(); ++t) z(t, column(t)) = 1.0;
  return z;
}

DisentangledModel DisentangledModel::zeros(std::size_t seq_len, std::size_t vocab) {
  return {{Matrix(vocab, vocab), Matrix(seq_len, seq_len)},
          {Matrix(vocab, vocab), Matrix(seq_len, seq_len)}};
}

void DisentangledModel::check_shape() const {
  const std::size_t t = seq_len(), n = vocab();
  auto ok = [](const Matrix& m, std::size_t d) { return m.rows() == d && m.cols() == d; };
  if (t == 0 || n == 0 || !ok(layer1.content, n) || !ok(layer2.content, n) ||
      !ok(layer1.positional, t) || !ok(layer2.positional, t)) {
    throw Error(Errc::dimension, "model layers disagree on (T, N)");
  }
}

GradSet GradSet::zeros(std::size_t seq_len, std::size_t vocab) {
  return {{Matrix(vocab, vocab), Matrix(seq_len, seq_len)},
          {Matrix(vocab, vocab), Matrix(seq_len, seq_len)}};
}

GradSet& GradSet::operator+=(const GradSet& other) {
  layer1.content += other.layer1.content;
  layer1.positional += other.layer1.positional;
  layer2.content += other.layer2.content;
  layer2.positional += other.layer2.positional;
  return *this;
}

GradSet& GradSet::operator*=(double scale) {
  for_each_matrix(*this, [&](int, Matrix& m) { m *= scale; });
  return *this;
}

double GradSet::max_abs() const noexcept {
  double m = 0.0;
  for_each_matrix(*this, [&](int, const Matrix& x) { m = std::max(m, x.max_abs()); });
  return m;
}

bool GradSet::all_finite() const noexcept {
  bool ok = true;
  for_each_matrix(*this, [&](int, const Matrix& x) { ok = ok && x.all_finite(); });
  return ok;
}

namespace {

Matrix logits(const LayerWeights& w, const ContentMatrix& z) {
  const std::size_t t = z.seq_len();
  Matrix a = w.positional;
  for (std::size_t i = 0; i < t; ++i) {
    const auto wrow = w.content.row(z.column(i));
    for (std::size_t j = 0; j < t; ++j) a(i, j) += wrow[z.column(j)];
  }
  return a;
}

// f = s Z for a row vector s over positions.
std::vector<double> gather_content(std::span<const double> s, const ContentMatrix& z) {
  std::vector<double> f(z.vocab(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) f[z.column(i)] += s[i];
  return f;
}

}  // namespace

ForwardTrace forward(const DisentangledModel& model, const ContentMatrix& z, Layer2Rows rows) {
  model.check_shape();
  const std::size_t t = model.seq_len();
  if (z.seq_len() != t || z.vocab() != model.vocab()) {
    throw Error(Errc::dimension, "content matrix is " + std::to_string(z.seq_len()) + "x" +
                                     std::to_string(z.vocab()) + ", model expects " +
                                     std::to_string(t) + "x" + std::to_string(model.vocab()));
  }
  ForwardTrace tr;
  tr.A1 = logits(model.layer1, z);
  tr.S1 = masked_softmax(tr.A1);
  tr.A2 = logits(model.layer2, z);
  const auto last = tr.S1.row(t - 1);
  if (rows == Layer2Rows::all) {
    const Matrix mixed = tr.S1 * tr.A2;
    tr.S2 = masked_softmax(mixed);
    tr.layer2_logits.assign(mixed.row(t - 1).begin(), mixed.row(t - 1).end());
  } else {
    tr.layer2_logits = vecmat(last, tr.A2);
    tr.S2 = Matrix(t, t);
    const auto s = softmax(tr.layer2_logits);
    std::copy(s.begin(), s.end(), tr.S2.row(t - 1).begin());
  }
  tr.f2 = gather_content(last, z);
  // f1 = S2_T (S1 Z) = (S2_T S1) Z
  tr.f1 = gather_content(vecmat(tr.S2.row(t - 1), tr.S1), z);
  return tr;
}

TrainingExample encode(const StarInstance& instance, std::size_t seq_len, std::size_t vocab) {
  if (instance.path.size() != 3) {
    throw Error(Errc::encoding, "expected a 3-node path, got " +
                                    std::to_string(instance.path.size()) + " nodes");
  }
  if (2 * instance.edges.size() + 2 != seq_len) {
    throw Error(Errc::encoding, std::to_string(instance.edges.size()) +
                                    " edges do not fill a sequence of length " +
                                    std::to_string(seq_len));
  }
  TrainingExample ex;
  ex.start = instance.path[0];
  ex.y1 = instance.path[1];
  ex.y2 = instance.path[2];
  std::vector<NodeId> tokens;
  tokens.reserve(seq_len);
  bool found = false;
  for (std::size_t i = 0; i < instance.edges.size(); ++i) {
    const Edge& e = instance.edges[i];
    tokens.push_back(e.from);
    tokens.push_back(e.to);
    if (e.from == ex.y1 && e.to == ex.y2) {
      ex.t_v_ctx = 2 * i;
      ex.t_end_ctx = 2 * i + 1;
      found = true;
    }
  }
  if (!found) throw Error(Errc::encoding, "edge (v, end) missing from the edge list");
  tokens.push_back(ex.y2);
  tokens.push_back(ex.start);
  ex.context = ContentMatrix(std::move(tokens), vocab);
  return ex;
}

ContentMatrix ar_context(const TrainingExample& example) {
  return example.context.with_token(example.context.seq_len() - 1, example.y1);
}

double neg_log(double p, bool* clamped) {
  if (!std::isfinite(p)) throw Error(Errc::evaluation, "non-finite probability");
  if (p < kProbabilityFloor) {
    if (clamped) *clamped = true;
    p = kProbabilityFloor;
  }
  return -std::log(p);
}

LossBreakdown mtp_loss(const DisentangledModel& model, const TrainingExample& example) {
  LossBreakdown l;
  const auto on_z = forward(model, example.context, Layer2Rows::last);
  const auto on_ar = forward(model, ar_context(example), Layer2Rows::last);
  l.l1a = neg_log(on_z.f1[example.y1 - 1], &l.clamped);
  l.l1b = neg_log(on_ar.f1[example.y2 - 1], &l.clamped);
  l.l2 = neg_log(on_z.f2[example.y2 - 1], &l.clamped);
  l.total = 0.5 * (0.5 * (l.l1a + l.l1b) + l.l2);
  return l;
}

double ntp_loss(const DisentangledModel& model, const TrainingExample& example) {
  const auto tr = forward(model, example.context, Layer2Rows::last);
  return neg_log(tr.f1[example.y1 - 1]);
}

// ------------------------------------------------------------- checkpoints

namespace {

constexpr const char* kCheckpointMagic = "mtplab-checkpoint";
constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const DisentangledModel& model, std::ostream& out) {
  model.check_shape();
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "seq_len " << model.seq_len() << " vocab " << model.vocab() << '\n';
  for_each_matrix(model, [&](int k, const Matrix& m) {
    out << kWeightNames[k] << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << text::format_double(m(i, j));
      out << '\n';
    }
  });
  if (!out) throw Error(Errc::io, "checkpoint: write failed");
}

DisentangledModel load_checkpoint(std::istream& in) {
  std::string magic, key_t, key_n;
  int version = 0;
  std::size_t t = 0, n = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) {
    throw Error(Errc::parse, "checkpoint: missing header");
  }
  if (version != kCheckpointVersion) {
    throw Error(Errc::parse, "checkpoint: unsupported version " + std::to_string(version));
  }
  if (!(in >> key_t >> t >> key_n >> n) || key_t != "seq_len" || key_n != "vocab") {
    throw Error(Errc::parse, "checkpoint: missing dimensions");
  }
  auto model = DisentangledModel::zeros(t, n);
  for_each_matrix(model, [&](int k, Matrix& m) {
    std::string name, token;
    std::size_t r = 0, c = 0;
    if (!(in >> name >> r >> c) || name != kWeightNames[k] || r != m.rows() || c != m.cols()) {
      throw Error(Errc::parse, std::string("checkpoint: expected block ") + kWeightNames[k]);
    }
    for (double& x : m.values()) {
      if (!(in >> token)) throw Error(Errc::parse, "checkpoint: truncated matrix");
      x = text::parse_double(token, "checkpoint");
    }
  });
  return model;
}

}  // namespace mtplab
