// SPDX-License-Identifier: Apache-2.0
#include "gesture/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gesture/error.hpp"

namespace gesture {
namespace {

constexpr std::array<char, 8> kMagic = {'G', 'E', 'S', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 32;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void boolean(bool v) { u32(v ? 1 : 0); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void matrix(const Eigen::MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  void store(const ad::ParamStore& params) {
    u64(params.size());
    for (ad::ParamId id : params.ids()) {
      str(params.name(id));
      matrix(params.value(id));
    }
  }

 private:
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int32_t i32() { return pod<std::int32_t>(); }
  double f64() { return pod<double>(); }
  bool boolean() {
    const std::uint32_t v = u32();
    if (v > 1) fail("bad flag");
    return v == 1;
  }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > kMaxLength) fail("string too long");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  Eigen::MatrixXd matrix() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (rows > kMaxLength || cols > kMaxLength || rows * cols > kMaxLength) fail("matrix too large");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    return m;
  }
  Eigen::VectorXd vector() {
    Eigen::MatrixXd m = matrix();
    if (m.cols() != 1 && m.size() != 0) fail("expected a column vector");
    return m.size() == 0 ? Eigen::VectorXd() : Eigen::VectorXd(m.col(0));
  }
  ad::ParamStore store() {
    ad::ParamStore params;
    const std::uint64_t count = u64();
    if (count > kMaxLength) fail("too many parameters");
    for (std::uint64_t i = 0; i < count; ++i) {
      std::string name = str();
      Eigen::MatrixXd value = matrix();
      const ad::ParamId id = params.add(std::move(name), value.rows(), value.cols());
      params.value(id) = value;
    }
    return params;
  }
  [[noreturn]] static void fail(const std::string& what) { throw Error(Errc::MalformedFile, what); }

 private:
  template <typename T>
  T pod() {
    T v;
    raw(&v, sizeof v);
    return v;
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated checkpoint");
  }
  std::istream& in_;
};

void write_seq2seq_config(Writer& w, const Seq2SeqConfig& c) {
  w.i32(c.word_dim);
  w.i32(c.hidden);
  w.i32(c.pose_dim);
  w.i32(c.n);
  w.i32(c.m);
  w.i32(c.attn_dim);
  w.i32(c.pre_dim);
  w.f64(c.dropout);
}

Seq2SeqConfig read_seq2seq_config(Reader& r) {
  Seq2SeqConfig c;
  c.word_dim = r.i32();
  c.hidden = r.i32();
  c.pose_dim = r.i32();
  c.n = r.i32();
  c.m = r.i32();
  c.attn_dim = r.i32();
  c.pre_dim = r.i32();
  c.dropout = r.f64();
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ostringstream buf(std::ios::binary);
  Writer w(buf);
  buf.write(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.str(ck.config_json);

  w.matrix(ck.pca.mean);
  w.matrix(ck.pca.components);
  w.matrix(ck.pca.explained_variance_ratio);

  w.str(ck.embeddings.path);
  w.u64(ck.embeddings.hash);
  w.i32(ck.embeddings.dim);

  w.boolean(ck.model.has_value());
  if (ck.model) {
    write_seq2seq_config(w, ck.model->config);
    w.boolean(ck.model->trained);
    w.store(ck.model->params);
  }

  w.boolean(ck.lift.has_value());
  if (ck.lift) {
    w.f64(ck.lift->momentum);
    w.f64(ck.lift->epsilon);
    w.boolean(ck.lift->trained);
    for (int l = 0; l < 2; ++l) {
      w.matrix(ck.lift->running_mean[l]);
      w.matrix(ck.lift->running_var[l]);
    }
    w.store(ck.lift->params);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  Reader r(in);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic) {
    Reader::fail(path.string() + " is not a checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(Errc::VersionMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                           std::to_string(kCheckpointVersion));
  }

  Checkpoint ck;
  try {
    ck.config_json = r.str();

    const Eigen::VectorXd mean = r.vector();
    if (mean.size() != static_cast<Eigen::Index>(kPoseDim)) Reader::fail("bad PCA mean");
    ck.pca.mean = mean;
    ck.pca.components = r.matrix();
    ck.pca.explained_variance_ratio = r.vector();
    if (ck.pca.fitted() && ck.pca.components.cols() != static_cast<Eigen::Index>(kPoseDim)) {
      Reader::fail("bad PCA components");
    }

    ck.embeddings.path = r.str();
    ck.embeddings.hash = r.u64();
    ck.embeddings.dim = r.i32();

    if (r.boolean()) {
      const Seq2SeqConfig config = read_seq2seq_config(r);
      const bool trained = r.boolean();
      Seq2SeqModel model = bind_model(config, r.store());
      model.trained = trained;
      ck.model = std::move(model);
    }

    if (r.boolean()) {
      const double momentum = r.f64();
      const double epsilon = r.f64();
      const bool trained = r.boolean();
      std::array<Eigen::VectorXd, 2> mean_stats;
      std::array<Eigen::VectorXd, 2> var_stats;
      for (int l = 0; l < 2; ++l) {
        mean_stats[l] = r.vector();
        var_stats[l] = r.vector();
      }
      LiftNet lift = bind_lift(r.store());
      lift.momentum = momentum;
      lift.epsilon = epsilon;
      lift.trained = trained;
      for (int l = 0; l < 2; ++l) {
        if (mean_stats[l].size() != kLiftHidden[l] || var_stats[l].size() != kLiftHidden[l]) {
          Reader::fail("bad lift running statistics");
        }
        lift.running_mean[l] = mean_stats[l];
        lift.running_var[l] = var_stats[l];
      }
      ck.lift = std::move(lift);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedFile) throw;
    throw Error(Errc::MalformedFile, e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) Reader::fail("trailing bytes after checkpoint");
  return ck;
}

}  // namespace gesture
