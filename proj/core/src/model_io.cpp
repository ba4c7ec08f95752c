#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "flusig/classify.hpp"
#include "flusig/error.hpp"

namespace flusig {
namespace {

// %.17g round-trips IEEE doubles exactly.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw parse_error("bad number \"" + s + "\"", line);
  }
}

long long parse_int(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw parse_error("bad integer \"" + s + "\"", line);
  }
}

void write_vector_line(std::ostream& out, const char* key, const std::vector<double>& v) {
  out << key;
  for (double x : v) out << ' ' << num(x);
  out << '\n';
}

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;

  bool next(std::string& key, std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      fields.clear();
      ss >> key;
      std::string f;
      while (ss >> f) fields.push_back(f);
      return true;
    }
    return false;
  }
};

}  // namespace

std::optional<ClassifierKind> classifier_kind_from(std::string_view name) {
  if (name == "nb") return ClassifierKind::nb;
  if (name == "svm") return ClassifierKind::svm;
  return std::nullopt;
}

std::string_view classifier_kind_name(ClassifierKind kind) {
  return kind == ClassifierKind::nb ? "nb" : "svm";
}

Prediction predict(const AnyModel& model, const FeatureVector& v) {
  if (const auto* nb = std::get_if<NBModel>(&model)) return predict_nb(*nb, v);
  return predict_svm(std::get<SVMModel>(model), v);
}

std::uint64_t model_vocab_hash(const AnyModel& model) {
  if (const auto* nb = std::get_if<NBModel>(&model)) return nb->vocab_hash;
  return std::get<SVMModel>(model).vocab_hash;
}

void save_model(std::ostream& out, const AnyModel& model) {
  char hash_buf[24];
  if (const auto* nb = std::get_if<NBModel>(&model)) {
    out << "kind nb\n";
    out << "dimension " << nb->dimension << '\n';
    std::snprintf(hash_buf, sizeof(hash_buf), "%016" PRIx64, nb->vocab_hash);
    out << "vocab_hash " << hash_buf << '\n';
    out << "log_prior " << num(nb->log_prior_pos) << ' ' << num(nb->log_prior_neg) << '\n';
    write_vector_line(out, "log_p1_pos", nb->log_p1_pos);
    write_vector_line(out, "log_p0_pos", nb->log_p0_pos);
    write_vector_line(out, "log_p1_neg", nb->log_p1_neg);
    write_vector_line(out, "log_p0_neg", nb->log_p0_neg);
    return;
  }
  const SVMModel& svm = std::get<SVMModel>(model);
  out << "kind svm\n";
  out << "dimension " << svm.dimension << '\n';
  std::snprintf(hash_buf, sizeof(hash_buf), "%016" PRIx64, svm.vocab_hash);
  out << "vocab_hash " << hash_buf << '\n';
  out << "params " << num(svm.c) << ' ' << num(svm.gamma) << ' ' << num(svm.bias) << '\n';
  out << "support " << svm.support_vectors.size() << '\n';
  for (std::size_t i = 0; i < svm.support_vectors.size(); ++i) {
    out << "sv " << svm.sv_label[i] << ' ' << num(svm.alpha[i]);
    for (std::uint32_t f : svm.support_vectors[i].active) out << ' ' << f;
    out << '\n';
  }
}

AnyModel load_model(std::istream& in) {
  LineReader reader{in};
  std::string key;
  std::vector<std::string> fields;
  if (!reader.next(key, fields) || key != "kind" || fields.size() != 1) {
    throw parse_error("model file must start with a 'kind' line", reader.line_no);
  }
  const auto kind = classifier_kind_from(fields[0]);
  if (!kind.has_value()) throw parse_error("unknown model kind \"" + fields[0] + "\"", reader.line_no);

  auto expect = [&](const char* want) {
    if (!reader.next(key, fields) || key != want) {
      throw parse_error(std::string("expected '") + want + "' line", reader.line_no);
    }
  };

  expect("dimension");
  if (fields.size() != 1) throw parse_error("bad dimension line", reader.line_no);
  const std::uint32_t dimension = static_cast<std::uint32_t>(parse_int(fields[0], reader.line_no));
  expect("vocab_hash");
  if (fields.size() != 1) throw parse_error("bad vocab_hash line", reader.line_no);
  const std::uint64_t vocab_hash = std::strtoull(fields[0].c_str(), nullptr, 16);

  if (*kind == ClassifierKind::nb) {
    NBModel nb;
    nb.dimension = dimension;
    nb.vocab_hash = vocab_hash;
    expect("log_prior");
    if (fields.size() != 2) throw parse_error("bad log_prior line", reader.line_no);
    nb.log_prior_pos = parse_double(fields[0], reader.line_no);
    nb.log_prior_neg = parse_double(fields[1], reader.line_no);
    auto read_vec = [&](const char* want, std::vector<double>& v) {
      expect(want);
      if (fields.size() != dimension) {
        throw parse_error(std::string(want) + " has " + std::to_string(fields.size()) +
                              " entries, expected " + std::to_string(dimension),
                          reader.line_no);
      }
      v.resize(dimension);
      for (std::size_t i = 0; i < fields.size(); ++i) v[i] = parse_double(fields[i], reader.line_no);
    };
    read_vec("log_p1_pos", nb.log_p1_pos);
    read_vec("log_p0_pos", nb.log_p0_pos);
    read_vec("log_p1_neg", nb.log_p1_neg);
    read_vec("log_p0_neg", nb.log_p0_neg);
    nb.rebuild_base();
    return nb;
  }

  SVMModel svm;
  svm.dimension = dimension;
  svm.vocab_hash = vocab_hash;
  expect("params");
  if (fields.size() != 3) throw parse_error("bad params line", reader.line_no);
  svm.c = parse_double(fields[0], reader.line_no);
  svm.gamma = parse_double(fields[1], reader.line_no);
  svm.bias = parse_double(fields[2], reader.line_no);
  expect("support");
  if (fields.size() != 1) throw parse_error("bad support line", reader.line_no);
  const long long n_sv = parse_int(fields[0], reader.line_no);
  for (long long s = 0; s < n_sv; ++s) {
    expect("sv");
    if (fields.size() < 2) throw parse_error("bad sv line", reader.line_no);
    const long long label = parse_int(fields[0], reader.line_no);
    if (label != 1 && label != -1) throw parse_error("sv label must be 1 or -1", reader.line_no);
    svm.sv_label.push_back(static_cast<int>(label));
    svm.alpha.push_back(parse_double(fields[1], reader.line_no));
    FeatureVector v;
    v.dimension = dimension;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      const long long f = parse_int(fields[i], reader.line_no);
      if (f < 0 || f >= static_cast<long long>(dimension)) {
        throw parse_error("sv feature index out of range", reader.line_no);
      }
      v.active.push_back(static_cast<std::uint32_t>(f));
    }
    svm.support_vectors.push_back(std::move(v));
  }
  return svm;
}

}  // namespace flusig
