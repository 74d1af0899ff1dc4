// Line-oriented model file. Doubles are written as hexfloats so a
// save/load round trip is bit-exact.
#include <charconv>
#include <cstdio>
#include <sstream>

#include "mhxai/ensemble.hpp"
#include "mhxai/error.hpp"
#include "text_util.hpp"

namespace mhxai::ensemble {

namespace {

constexpr std::string_view kMagic = "mhxai-tree-ensemble";

std::string hex(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  (void)ec;
  return std::string(buf, end);
}

[[noreturn]] void corrupt(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kCorruptFile, "model file line " + std::to_string(line) + ": " + what);
}

class Reader {
 public:
  explicit Reader(std::string_view text) {
    for (auto line : util::split_lines(text)) lines_.emplace_back(line);
  }

  /// Next line split on spaces; the first token must equal `key`.
  std::vector<std::string> expect(std::string_view key) {
    if (pos_ >= lines_.size()) corrupt(pos_ + 1, "unexpected end of file, wanted '" + std::string(key) + "'");
    auto tokens = tokenize(lines_[pos_++]);
    if (tokens.empty() || tokens[0] != key) {
      corrupt(pos_, "expected '" + std::string(key) + "'");
    }
    return tokens;
  }

  std::optional<std::vector<std::string>> maybe(std::string_view key) {
    if (pos_ >= lines_.size()) return std::nullopt;
    auto tokens = tokenize(lines_[pos_]);
    if (tokens.empty() || tokens[0] != key) return std::nullopt;
    ++pos_;
    return tokens;
  }

  std::vector<std::string> next() {
    if (pos_ >= lines_.size()) corrupt(pos_ + 1, "unexpected end of file");
    return tokenize(lines_[pos_++]);
  }

  std::string rest_of(std::string_view key) {
    if (pos_ >= lines_.size()) corrupt(pos_ + 1, "unexpected end of file");
    const std::string& line = lines_[pos_++];
    if (line.rfind(std::string(key) + " ", 0) != 0 && line != key) {
      corrupt(pos_, "expected '" + std::string(key) + "'");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  }

  double number(const std::string& token) const {
    double v = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    bool negative = false;
    if (first != last && *first == '-') {
      negative = true;
      ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::hex);
    if (ec != std::errc() || ptr != last) corrupt(pos_, "bad number '" + token + "'");
    return negative ? -v : v;
  }

  long integer(const std::string& token) const {
    long v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      corrupt(pos_, "bad integer '" + token + "'");
    }
    return v;
  }

  std::size_t line() const { return pos_; }
  std::size_t remaining() const { return lines_.size() - pos_; }

 private:
  static std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    for (std::string t; is >> t;) out.push_back(t);
    return out;
  }

  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

template <int N>
Eigen::Matrix<double, N, 1> read_vector(Reader& r, std::string_view key) {
  auto t = r.expect(key);
  if (t.size() != N + 1) corrupt(r.line(), std::string(key) + " needs " + std::to_string(N) + " values");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = r.number(t[static_cast<std::size_t>(i) + 1]);
  return v;
}

template <typename Vec>
void write_vector(std::ostringstream& os, std::string_view key, const Vec& v) {
  os << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << hex(v[i]);
  os << '\n';
}

}  // namespace

std::string to_text(const TreeEnsemble& m) {
  std::ostringstream os;
  os << kMagic << '\n' << "version " << kModelFormatVersion << '\n';
  os << "classes";
  for (const auto& c : m.class_names) os << ' ' << c;
  os << "\nfeatures";
  for (const auto& f : m.feature_names) os << ' ' << f;
  os << "\nlearning_rate " << hex(m.learning_rate) << '\n';
  write_vector(os, "base_score", m.base_score);
  write_vector(os, "feature_mean", m.feature_stats.mean);
  write_vector(os, "feature_std", m.feature_stats.stddev);
  os << "config " << m.config << '\n';
  if (m.global_importance) write_vector(os, "importance", *m.global_importance);
  os << "rounds " << m.rounds.size() << '\n';
  for (std::size_t r = 0; r < m.rounds.size(); ++r) {
    for (int c = 0; c < kNumClasses; ++c) {
      const Tree& t = m.rounds[r][c];
      os << "tree " << r << ' ' << c << " nodes " << t.nodes.size() << '\n';
      for (const auto& n : t.nodes) {
        if (n.is_leaf()) {
          os << "leaf " << hex(n.value) << ' ' << hex(n.cover) << '\n';
        } else {
          os << "split " << n.feature << ' ' << hex(n.threshold) << ' ' << n.left << ' '
             << n.right << ' ' << hex(n.cover) << '\n';
        }
      }
    }
  }
  os << "end\n";
  return os.str();
}

TreeEnsemble from_text(std::string_view text) {
  Reader r(text);
  if (r.next() != std::vector<std::string>{std::string(kMagic)}) {
    corrupt(1, "not a tree-ensemble model file");
  }
  {
    auto t = r.expect("version");
    if (t.size() != 2) corrupt(r.line(), "bad version line");
    const long v = r.integer(t[1]);
    if (v != kModelFormatVersion) {
      throw Error(ErrorCode::kVersionMismatch, "model format version " + std::to_string(v) +
                                                   " is not supported (expected " +
                                                   std::to_string(kModelFormatVersion) + ")");
    }
  }
  TreeEnsemble m;
  {
    auto t = r.expect("classes");
    if (t.size() != kNumClasses + 1) corrupt(r.line(), "wrong class count");
    for (int c = 0; c < kNumClasses; ++c) m.class_names[c] = t[static_cast<std::size_t>(c) + 1];
  }
  {
    auto t = r.expect("features");
    if (t.size() != kNumFeatures + 1) corrupt(r.line(), "wrong feature count");
    for (int f = 0; f < kNumFeatures; ++f) m.feature_names[f] = t[static_cast<std::size_t>(f) + 1];
  }
  {
    auto t = r.expect("learning_rate");
    if (t.size() != 2) corrupt(r.line(), "bad learning_rate line");
    m.learning_rate = r.number(t[1]);
  }
  m.base_score = read_vector<kNumClasses>(r, "base_score");
  m.feature_stats.mean = read_vector<kNumFeatures>(r, "feature_mean");
  m.feature_stats.stddev = read_vector<kNumFeatures>(r, "feature_std");
  m.config = r.rest_of("config");
  if (auto t = r.maybe("importance")) {
    if (t->size() != kNumFeatures + 1) corrupt(r.line(), "importance needs 8 values");
    FeatureVector v;
    for (int f = 0; f < kNumFeatures; ++f) v[f] = r.number((*t)[static_cast<std::size_t>(f) + 1]);
    m.global_importance = v;
  }
  const auto count = [&] {
    auto t = r.expect("rounds");
    if (t.size() != 2) corrupt(r.line(), "bad rounds line");
    const long n = r.integer(t[1]);
    if (n < 1) corrupt(r.line(), "rounds must be positive");
    if (static_cast<std::size_t>(n) > r.remaining()) corrupt(r.line(), "truncated model file");
    return static_cast<std::size_t>(n);
  }();
  m.rounds.resize(count);
  for (std::size_t round = 0; round < count; ++round) {
    for (int c = 0; c < kNumClasses; ++c) {
      auto t = r.expect("tree");
      if (t.size() != 5 || t[3] != "nodes" || r.integer(t[1]) != static_cast<long>(round) ||
          r.integer(t[2]) != c) {
        corrupt(r.line(), "bad tree header");
      }
      const long nodes = r.integer(t[4]);
      if (nodes < 1) corrupt(r.line(), "tree without nodes");
      if (static_cast<std::size_t>(nodes) > r.remaining()) corrupt(r.line(), "truncated model file");
      Tree& tree = m.rounds[round][c];
      tree.nodes.resize(static_cast<std::size_t>(nodes));
      for (auto& n : tree.nodes) {
        auto line = r.next();
        if (line.size() == 3 && line[0] == "leaf") {
          n.value = r.number(line[1]);
          n.cover = r.number(line[2]);
        } else if (line.size() == 6 && line[0] == "split") {
          n.feature = static_cast<int>(r.integer(line[1]));
          if (n.feature < 0) corrupt(r.line(), "negative split feature");
          n.threshold = r.number(line[2]);
          n.left = static_cast<int>(r.integer(line[3]));
          n.right = static_cast<int>(r.integer(line[4]));
          n.cover = r.number(line[5]);
        } else {
          corrupt(r.line(), "expected 'leaf' or 'split'");
        }
      }
    }
  }
  if (r.next() != std::vector<std::string>{"end"}) corrupt(r.line(), "missing 'end'");
  m.validate();
  return m;
}

void save(const TreeEnsemble& m, const std::filesystem::path& path) {
  util::write_file(path, to_text(m));
}

TreeEnsemble load(const std::filesystem::path& path) { return from_text(util::read_file(path)); }

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string model_version(const TreeEnsemble& m) {
  return "mhxai-" + std::to_string(kModelFormatVersion) + "-" + digest(to_text(m));
}

}  // namespace mhxai::ensemble
