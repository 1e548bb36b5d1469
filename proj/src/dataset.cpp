#include "qpqc/dataset.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qpqc/error.hpp"
#include "qpqc/random.hpp"

namespace qpqc {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'Q', 'I', 'M', 'G'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// HSV with s, v in [0, 1] and hue in turns.
std::array<double, 3> hue_color(double hue, double sat, double val) {
  hue -= std::floor(hue);
  const double h6 = hue * 6.0;
  const int sector = static_cast<int>(h6) % 6;
  const double f = h6 - std::floor(h6);
  const double p = val * (1 - sat), q = val * (1 - sat * f), t = val * (1 - sat * (1 - f));
  switch (sector) {
    case 0: return {val, t, p};
    case 1: return {q, val, p};
    case 2: return {p, val, t};
    case 3: return {p, q, val};
    case 4: return {t, p, val};
    default: return {val, p, q};
  }
}

// Texture intensity in [0, 1] at normalized coordinates (u, v).
class Texture {
 public:
  Texture(int family, Rng& rng) : family_(family % 10) {
    // phases are anchored at the image centre and only jittered, so each
    // class keeps a recognisable mean pattern
    freq_ = rng.uniform(2.5, 3.0);
    phase_a_ = rng.uniform(-0.6, 0.6);
    phase_b_ = rng.uniform(-0.6, 0.6);
    cu_ = rng.uniform(0.35, 0.65);
    cv_ = rng.uniform(0.35, 0.65);
    width_ = rng.uniform(0.15, 0.3);
    for (auto& s : spots_) s = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
  }

  double operator()(double u, double v) const {
    constexpr double tau = 2 * std::numbers::pi;
    const double du = u - 0.5, dv = v - 0.5;
    switch (family_) {
      case 0: return 0.5 + 0.5 * std::sin(tau * freq_ * dv + phase_a_);
      case 1: return 0.5 + 0.5 * std::sin(tau * freq_ * du + phase_a_);
      case 2: return 0.5 + 0.5 * std::sin(tau * freq_ * du + phase_a_) * std::sin(tau * freq_ * dv + phase_b_);
      case 3: return 0.5 + 0.5 * std::sin(tau * freq_ * (du + dv) / std::numbers::sqrt2 + phase_a_);
      case 4: {
        const double r2 = (u - cu_) * (u - cu_) + (v - cv_) * (v - cv_);
        return std::exp(-r2 / (width_ * width_));
      }
      case 5: return 0.5 + 0.5 * std::sin(tau * freq_ * (du - dv) / std::numbers::sqrt2 + phase_a_);
      case 6: return 1.0 - v;
      case 7: return u;
      case 8: {
        double s = 0.0;
        for (const auto& [su, sv] : spots_) {
          s += std::exp(-((u - su) * (u - su) + (v - sv) * (v - sv)) / (0.25 * width_ * width_));
        }
        return std::min(1.0, s);
      }
      default: {
        const double r = std::sqrt((u - cu_) * (u - cu_) + (v - cv_) * (v - cv_));
        return 0.5 + 0.5 * std::cos(tau * freq_ * r + phase_a_);
      }
    }
  }

 private:
  int family_;
  double freq_, phase_a_, phase_b_, cu_, cv_, width_;
  std::array<std::pair<double, double>, 4> spots_;
};

}  // namespace

void write_qimg(const std::string& path, const Tensor& image) {
  if (image.rank() != 3) throw ShapeError("write_qimg: expected a (C, H, W) tensor");
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IngestionError("cannot write " + path);
  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(h));
  put_u32(os, static_cast<std::uint32_t>(w));
  put_u32(os, static_cast<std::uint32_t>(c));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(image.at(ch, y, x))));
      }
    }
  }
  if (!os) throw IngestionError("write failed: " + path);
}

Tensor read_qimg(const std::string& path, ImageShape expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestionError("cannot open image " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IngestionError("bad QIMG header in " + path);
  }
  const auto h = get_u32(&bytes[4]), w = get_u32(&bytes[8]), c = get_u32(&bytes[12]);
  if (static_cast<int>(h) != expected.height || static_cast<int>(w) != expected.width ||
      static_cast<int>(c) != expected.channels) {
    throw IngestionError("image " + path + " is " + std::to_string(h) + "x" + std::to_string(w) + "x" +
                         std::to_string(c) + ", expected " + std::to_string(expected.height) + "x" +
                         std::to_string(expected.width) + "x" + std::to_string(expected.channels));
  }
  const std::size_t count = std::size_t{h} * w * c;
  if (bytes.size() != 16 + 4 * count) throw IngestionError("truncated or oversized payload in " + path);
  Tensor t({c, h, w});
  const unsigned char* p = bytes.data() + 16;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch, p += 4) {
        const double v = std::bit_cast<float>(get_u32(p));
        if (!std::isfinite(v) || v < 0.0 || v > 255.0) {
          throw IngestionError("pixel value out of range in " + path);
        }
        t.at(ch, y, x) = v;
      }
    }
  }
  return t;
}

Dataset load_dataset(const std::string& dir, ImageShape shape, int class_count, std::uint64_t seed,
                     double split_fraction) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split_fraction must be in (0, 1)");
  if (class_count < 2) throw ConfigError("class_count must be at least 2");
  const fs::path manifest = fs::path(dir) / "manifest.csv";
  std::ifstream is(manifest);
  if (!is) throw IngestionError("missing manifest " + manifest.string());

  std::vector<std::vector<Sample>> by_class(static_cast<std::size_t>(class_count));
  std::string line;
  int line_no = 0;
  double max_value = 0.0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw IngestionError(manifest.string() + ":" + std::to_string(line_no) + ": expected filename,label");
    }
    const std::string file = trim(line.substr(0, comma));
    const std::string label_text = trim(line.substr(comma + 1));
    if (line_no == 1 && label_text == "label") continue;
    int label = -1;
    try {
      std::size_t used = 0;
      label = std::stoi(label_text, &used);
      if (used != label_text.size()) label = -1;
    } catch (const std::exception&) {
      label = -1;
    }
    if (label < 0) throw IngestionError(manifest.string() + ":" + std::to_string(line_no) + ": bad label");
    if (label >= class_count) {
      throw IngestionError(manifest.string() + ": label " + std::to_string(label) + " outside " +
                           std::to_string(class_count) + " classes (" + file + ")");
    }
    Sample s{read_qimg((fs::path(dir) / file).string(), shape), label, file};
    for (double v : s.image.data) max_value = std::max(max_value, v);
    by_class[static_cast<std::size_t>(label)].push_back(std::move(s));
  }
  for (int c = 0; c < class_count; ++c) {
    if (by_class[static_cast<std::size_t>(c)].size() < 2) {
      throw IngestionError(manifest.string() + ": class " + std::to_string(c) + " has fewer than 2 samples");
    }
  }

  Dataset out;
  for (int c = 0; c < class_count; ++c) {
    auto& samples = by_class[static_cast<std::size_t>(c)];
    if (max_value > 1.0) {
      for (auto& s : samples) {
        for (auto& v : s.image.data) v /= 255.0;
      }
    }
    std::vector<std::size_t> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(std::span<std::size_t>(idx));
    auto n_train = static_cast<std::size_t>(std::llround(split_fraction * static_cast<double>(samples.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, samples.size() - 1);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      (i < n_train ? out.train : out.val).push_back(std::move(samples[idx[i]]));
    }
  }
  return out;
}

std::string synth_dataset(const std::string& dir, ImageShape shape, int class_count, int per_class,
                          std::uint64_t seed) {
  if (class_count < 2 || per_class < 1) throw ConfigError("synth_dataset: need >= 2 classes and >= 1 sample each");
  if (shape.height < 2 || shape.width < 2 || shape.channels < 1) throw ConfigError("synth_dataset: bad image shape");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IngestionError("cannot create " + dir + ": " + ec.message());
  const fs::path manifest = fs::path(dir) / "manifest.csv";
  std::ofstream man(manifest);
  if (!man) throw IngestionError("cannot write " + manifest.string());
  man << "filename,label\n";

  const auto c = static_cast<std::size_t>(shape.channels);
  const auto h = static_cast<std::size_t>(shape.height);
  const auto w = static_cast<std::size_t>(shape.width);
  int index = 0;
  for (int k = 0; k < class_count; ++k) {
    for (int i = 0; i < per_class; ++i, ++index) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
      const Texture tex(k, rng);
      // neighbouring classes overlap in hue, so colour alone does not separate them
      const double hue_step = 1.0 / class_count;
      const auto color = hue_color(k * hue_step + rng.uniform(-0.75, 0.75) * hue_step, rng.uniform(0.3, 0.7),
                                   rng.uniform(0.6, 0.95));
      Tensor img({c, h, w});
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const double t = tex(static_cast<double>(x) / static_cast<double>(w - 1),
                               static_cast<double>(y) / static_cast<double>(h - 1));
          for (std::size_t ch = 0; ch < c; ++ch) {
            const double base = c == 3 ? color[ch] : 0.8;
            img.at(ch, y, x) = std::clamp(base * (0.3 + 0.7 * t) + 0.08 * rng.normal(), 0.0, 1.0);
          }
        }
      }
      char name[32];
      std::snprintf(name, sizeof name, "img_%05d.qimg", index);
      write_qimg((fs::path(dir) / name).string(), img);
      man << name << ',' << k << '\n';
    }
  }
  if (!man) throw IngestionError("write failed: " + manifest.string());
  return manifest.string();
}

double linear_probe_accuracy(const Dataset& data, int class_count, int iterations) {
  if (data.train.empty() || data.val.empty()) throw ShapeError("linear probe needs train and val samples");
  const auto dim = static_cast<Eigen::Index>(data.train.front().image.size());
  const auto K = static_cast<Eigen::Index>(class_count);
  auto to_matrix = [&](const std::vector<Sample>& s) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(s.size()), dim);
    for (std::size_t i = 0; i < s.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(s[i].image.data.data(), dim);
    }
    return x;
  };
  Eigen::MatrixXd xt = to_matrix(data.train), xv = to_matrix(data.val);
  const Eigen::RowVectorXd mean = xt.colwise().mean();
  Eigen::RowVectorXd sd = ((xt.rowwise() - mean).array().square().colwise().mean()).sqrt();
  sd = sd.unaryExpr([](double s) { return s > 1e-9 ? s : 1.0; });
  xt = (xt.rowwise() - mean).array().rowwise() / sd.array();
  xv = (xv.rowwise() - mean).array().rowwise() / sd.array();

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(xt.rows(), K);
  for (std::size_t i = 0; i < data.train.size(); ++i) y(static_cast<Eigen::Index>(i), data.train[i].label) = 1.0;
  Eigen::MatrixXd wgt = Eigen::MatrixXd::Zero(dim, K);
  Eigen::RowVectorXd bias = Eigen::RowVectorXd::Zero(K);
  const double lr = 0.1, l2 = 1e-3, n = static_cast<double>(xt.rows());
  for (int it = 0; it < iterations; ++it) {
    Eigen::MatrixXd z = (xt * wgt).rowwise() + bias;
    z = z.colwise() - z.rowwise().maxCoeff();
    z = z.array().exp();
    z = z.array().colwise() / z.rowwise().sum().array();
    const Eigen::MatrixXd g = (z - y) / n;
    wgt -= lr * (xt.transpose() * g + l2 * wgt);
    bias -= lr * g.colwise().sum();
  }
  const Eigen::MatrixXd scores = (xv * wgt).rowwise() + bias;
  int correct = 0;
  for (std::size_t i = 0; i < data.val.size(); ++i) {
    Eigen::Index best = 0;
    scores.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
    correct += best == data.val[i].label;
  }
  return static_cast<double>(correct) / static_cast<double>(data.val.size());
}

}  // namespace qpqc
