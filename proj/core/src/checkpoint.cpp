#include "pmifact/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "pmifact/error.hpp"

namespace pmifact {

static_assert(std::endian::native == std::endian::little,
              "checkpoints are written in host order, which must be little-endian");

namespace {

constexpr char kMagic[8] = {'P', 'M', 'I', 'F', 'C', 'K', 'P', '1'};

class Writer {
 public:
  template <class T>
  void pod(const T& v) {
    raw(&v, sizeof(T));
  }
  template <class T>
  void array(const T* data, std::uint64_t n) {
    pod(n);
    raw(data, n * sizeof(T));
  }
  void raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string name)
      : bytes_(std::move(bytes)), name_(std::move(name)) {}

  template <class T>
  T pod() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  template <class T>
  std::vector<T> array() {
    const auto n = pod<std::uint64_t>();
    if (n > (bytes_.size() - pos_) / sizeof(T)) fail("array length exceeds file size");
    std::vector<T> v(n);
    raw(v.data(), n * sizeof(T));
    return v;
  }
  void raw(void* p, std::size_t n) {
    if (bytes_.size() - pos_ < n) fail("truncated");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(name_ + ": bad checkpoint: " + what);
  }

 private:
  std::vector<char> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& emb = ckpt.state.emb;
  const auto& opt = ckpt.state.optimizer;
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.pod(static_cast<std::uint8_t>(ckpt.loss));
  w.pod(static_cast<std::uint8_t>(ckpt.optimizer.kind));
  w.pod(ckpt.optimizer.learning_rate);
  w.pod(ckpt.optimizer.beta1);
  w.pod(ckpt.optimizer.beta2);
  w.pod(ckpt.optimizer.epsilon);
  w.pod(static_cast<std::uint64_t>(emb.terms()));
  w.pod(static_cast<std::uint64_t>(emb.contexts()));
  w.pod(static_cast<std::uint64_t>(emb.dim()));
  w.raw(emb.T.data(), sizeof(float) * static_cast<std::size_t>(emb.T.size()));
  w.raw(emb.C.data(), sizeof(float) * static_cast<std::size_t>(emb.C.size()));
  w.array(emb.b.data(), static_cast<std::uint64_t>(emb.b.size()));
  w.array(emb.b_tilde.data(), static_cast<std::uint64_t>(emb.b_tilde.size()));
  w.pod(opt.step);
  for (const auto* v : {&opt.m_T, &opt.v_T, &opt.m_C, &opt.v_C, &opt.m_b, &opt.v_b,
                        &opt.m_bt, &opt.v_bt}) {
    w.array(v->data(), v->size());
  }
  w.pod(ckpt.state.epochs_done);
  w.array(ckpt.state.loss_trace.data(), ckpt.state.loss_trace.size());

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + tmp.string());
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  Reader r(std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>()),
           path.string());
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) r.fail("wrong magic");

  Checkpoint ckpt;
  const auto loss = r.pod<std::uint8_t>();
  const auto opt_kind = r.pod<std::uint8_t>();
  if (loss > 2 || opt_kind > 1) r.fail("unknown loss or optimizer code");
  ckpt.loss = static_cast<LossKind>(loss);
  ckpt.optimizer.kind = static_cast<OptimizerKind>(opt_kind);
  ckpt.optimizer.learning_rate = r.pod<double>();
  ckpt.optimizer.beta1 = r.pod<double>();
  ckpt.optimizer.beta2 = r.pod<double>();
  ckpt.optimizer.epsilon = r.pod<double>();

  const auto terms = static_cast<Eigen::Index>(r.pod<std::uint64_t>());
  const auto contexts = static_cast<Eigen::Index>(r.pod<std::uint64_t>());
  const auto dim = static_cast<Eigen::Index>(r.pod<std::uint64_t>());
  if (terms < 0 || contexts < 0 || dim < 1 || terms > (1 << 30) || contexts > (1 << 30) ||
      dim > (1 << 20)) {
    r.fail("implausible shape");
  }
  auto& emb = ckpt.state.emb;
  emb.T.resize(terms, dim);
  emb.C.resize(dim, contexts);
  r.raw(emb.T.data(), sizeof(float) * static_cast<std::size_t>(emb.T.size()));
  r.raw(emb.C.data(), sizeof(float) * static_cast<std::size_t>(emb.C.size()));
  const auto b = r.array<float>();
  const auto bt = r.array<float>();
  emb.b = Eigen::Map<const Eigen::VectorXf>(b.data(), static_cast<Eigen::Index>(b.size()));
  emb.b_tilde =
      Eigen::Map<const Eigen::VectorXf>(bt.data(), static_cast<Eigen::Index>(bt.size()));

  auto& opt = ckpt.state.optimizer;
  opt.step = r.pod<std::uint64_t>();
  for (auto* v : {&opt.m_T, &opt.v_T, &opt.m_C, &opt.v_C, &opt.m_b, &opt.v_b, &opt.m_bt,
                  &opt.v_bt}) {
    *v = r.array<float>();
  }
  ckpt.state.epochs_done = r.pod<std::uint32_t>();
  ckpt.state.loss_trace = r.array<double>();
  if (!r.done()) r.fail("trailing bytes");
  // Validates moment shapes against the parameters.
  Optimizer check(ckpt.optimizer, opt, emb);
  return ckpt;
}

}  // namespace pmifact
