// flusig: filter -> rules -> featurize -> train/evaluate -> predict ->
// aggregate -> correlate, as composable subcommands over file corpora.

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "flusig/classify.hpp"
#include "flusig/corpus.hpp"
#include "flusig/error.hpp"
#include "flusig/eval.hpp"
#include "flusig/features.hpp"
#include "flusig/keyword.hpp"
#include "flusig/rng.hpp"
#include "flusig/rulelang.hpp"
#include "flusig/surveillance.hpp"
#include "flusig/tokenize.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flusig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitValidation = 3;

// Missing required inputs after config-file merging; exits like a bad flag.
class usage_error : public error {
 public:
  using error::error;
};

void require_input(const std::string& value, const char* what) {
  if (value.empty()) throw usage_error(std::string(what) + " is required");
}

// ----------------------------------------------------------------- config ---

struct Options {
  std::string config_path;
  std::string corpus;
  std::string format = "jsonl";
  std::string keywords;
  std::string rulebook;
  std::string baseline;
  std::string counts;
  std::string model_dir;
  std::string out;
  std::string features = "uni";
  std::string cv_features = "uni,uni+rules,uni+bi,uni+bi+rules";
  std::string classifier = "nb";
  std::string folds = "A=10,I=3,P=10,W=3,S=10";
  std::string sets = "A,S,I,P,A+I+P,A+I+P+S";
  std::uint64_t seed = 1;
  std::size_t min_df = 1;
  bool undersample_flag = false;
  bool dedupe_flag = false;
  double svm_c = 0.0;      // 0 = grid search
  double svm_gamma = 0.0;  // 0 = grid search
  int inner_folds = kDefaultInnerFolds;
  double pa = -1.0;
  double pe = -1.0;
  std::string annotations_a;
  std::string annotations_b;
};

// JSON config supplies defaults; explicitly passed flags win.
void apply_config_file(const CLI::App& cmd, Options& opt) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) throw error("cannot open config file " + opt.config_path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::exception& e) {
    throw parse_error(std::string("config file: ") + e.what(), 0);
  }
  if (!j.is_object()) throw validation_error("config file must hold a JSON object");

  auto set_string = [&](const char* flag, const char* key, std::string& field) {
    if (cmd.get_option_no_throw(flag) != nullptr && cmd.count(flag) > 0) return;
    if (j.contains(key)) field = j.at(key).get<std::string>();
  };
  auto set_bool = [&](const char* flag, const char* key, bool& field) {
    if (cmd.get_option_no_throw(flag) != nullptr && cmd.count(flag) > 0) return;
    if (j.contains(key)) field = j.at(key).get<bool>();
  };
  set_string("--corpus", "corpus", opt.corpus);
  set_string("--format", "format", opt.format);
  set_string("--keywords", "keywords", opt.keywords);
  set_string("--rulebook", "rulebook", opt.rulebook);
  set_string("--baseline", "baseline", opt.baseline);
  set_string("--counts", "counts", opt.counts);
  set_string("--model-dir", "model_dir", opt.model_dir);
  set_string("--out", "out", opt.out);
  set_string("--features", "features", opt.features);
  set_string("--features", "features", opt.cv_features);
  set_string("--classifier", "classifier", opt.classifier);
  set_string("--folds", "folds", opt.folds);
  set_string("--sets", "sets", opt.sets);
  set_bool("--undersample", "undersample", opt.undersample_flag);
  set_bool("--dedupe", "dedupe", opt.dedupe_flag);
  if (cmd.count("--seed") == 0 && j.contains("seed")) opt.seed = j.at("seed").get<std::uint64_t>();
  if (cmd.get_option_no_throw("--min-df") != nullptr && cmd.count("--min-df") == 0 &&
      j.contains("min_df")) {
    opt.min_df = j.at("min_df").get<std::size_t>();
  }
  if (cmd.get_option_no_throw("--svm-c") != nullptr && cmd.count("--svm-c") == 0 &&
      j.contains("svm_c")) {
    opt.svm_c = j.at("svm_c").get<double>();
  }
  if (cmd.get_option_no_throw("--svm-gamma") != nullptr && cmd.count("--svm-gamma") == 0 &&
      j.contains("svm_gamma")) {
    opt.svm_gamma = j.at("svm_gamma").get<double>();
  }
  if (cmd.get_option_no_throw("--inner-folds") != nullptr && cmd.count("--inner-folds") == 0 &&
      j.contains("inner_folds")) {
    opt.inner_folds = j.at("inner_folds").get<int>();
  }
}

// Stable fingerprint of everything that shapes an artifact.
std::string config_stamp(const std::string& command, const Options& opt) {
  std::ostringstream canon;
  canon << "command=" << command << "|corpus=" << opt.corpus << "|format=" << opt.format
        << "|keywords=" << opt.keywords << "|rulebook=" << opt.rulebook
        << "|baseline=" << opt.baseline << "|counts=" << opt.counts
        << "|model_dir=" << opt.model_dir << "|features=" << opt.features
        << "|cv_features=" << opt.cv_features << "|classifier=" << opt.classifier
        << "|folds=" << opt.folds << "|sets=" << opt.sets << "|min_df=" << opt.min_df
        << "|undersample=" << opt.undersample_flag << "|dedupe=" << opt.dedupe_flag
        << "|svm_c=" << opt.svm_c << "|svm_gamma=" << opt.svm_gamma
        << "|inner_folds=" << opt.inner_folds << "|seed=" << opt.seed;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "config=%016" PRIx64 " seed=%" PRIu64, fnv1a(canon.str()),
                opt.seed);
  return buf;
}

// ------------------------------------------------------------------- io ----

// Writes to <path>.tmp and renames on commit so failures never leave a
// partial file that looks finished. Empty path = stdout.
class OutputFile {
 public:
  explicit OutputFile(const std::string& path) : path_(path) {
    if (!path_.empty()) {
      tmp_ = path_ + ".tmp";
      file_.open(tmp_, std::ios::binary | std::ios::trunc);
      if (!file_) throw error("cannot open output file " + path_);
    }
  }
  ~OutputFile() {
    if (!committed_ && !tmp_.empty()) {
      file_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void commit() {
    if (path_.empty()) {
      std::cout.flush();
      if (!std::cout) throw error("failed writing to stdout");
      committed_ = true;
      return;
    }
    file_.flush();
    if (!file_) throw error("failed writing " + path_);
    file_.close();
    fs::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream file_;
  bool committed_ = false;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open " + path);
  return in;
}

CorpusFormat parse_format(const std::string& name) {
  const auto f = corpus_format_from(name);
  if (!f.has_value()) throw validation_error("unknown corpus format \"" + name + "\"");
  return *f;
}

KeywordBag resolve_keywords(const Options& opt) {
  if (opt.keywords.empty()) return default_keywords();
  std::ifstream in = open_input(opt.keywords);
  return load_keywords(in);
}

RuleBook resolve_rulebook(const Options& opt) {
  if (opt.rulebook.empty()) throw validation_error("--rulebook is required here");
  std::ifstream in = open_input(opt.rulebook);
  return load_rulebook(in);
}

std::map<Category, int> parse_folds(const std::string& text) {
  std::map<Category, int> folds{{Category::A, 10}, {Category::I, 3}, {Category::P, 10},
                                {Category::W, 3},  {Category::S, 10}};
  std::istringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos || eq != 1) {
      throw validation_error("bad folds entry \"" + part + "\" (want C=K)");
    }
    const auto cat = category_from_letter(part[0]);
    if (!cat.has_value()) throw validation_error("bad category in folds \"" + part + "\"");
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(part.substr(eq + 1), &used);
      if (used != part.size() - eq - 1) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw validation_error("bad fold count in \"" + part + "\"");
    }
    if (k < 2) throw validation_error("fold counts must be >= 2");
    folds[*cat] = k;
  }
  return folds;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// ------------------------------------------------------------ subcommands ---

int cmd_filter(const Options& opt) {
  require_input(opt.corpus, "--corpus");
  const CorpusFormat format = parse_format(opt.format);
  const KeywordBag bag = resolve_keywords(opt);
  std::ifstream in = open_input(opt.corpus);
  OutputFile out(opt.out);
  out.stream() << "# " << config_stamp("filter", opt) << '\n';
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t overlong = 0;
  std::unordered_set<std::string> seen;
  for_each_record(in, format,
                  [&](AnnotatedMessage&& rec, const std::string& raw, std::size_t) {
                    ++total;
                    if (text_length(rec.message.text) > kSoftTextLimit) ++overlong;
                    if (opt.dedupe_flag &&
                        !seen.insert(normalized_text(rec.message.text)).second) {
                      return;
                    }
                    rec.message.tokens = tokenize(rec.message.text);
                    if (stage1_match(rec.message, bag)) {
                      ++kept;
                      out.stream() << raw << '\n';
                    }
                  });
  out.commit();
  std::cerr << "filter: kept " << kept << " of " << total << " messages\n";
  if (overlong > 0) {
    std::cerr << "filter: note: " << overlong << " messages exceed " << kSoftTextLimit
              << " characters\n";
  }
  return kExitOk;
}

int cmd_rules_check(const Options& opt) {
  require_input(opt.rulebook, "--rulebook");
  const RuleBook book = resolve_rulebook(opt);
  std::vector<std::size_t> matches(book.rules.size(), 0);
  std::size_t total = 0;
  if (!opt.corpus.empty()) {
    std::ifstream in = open_input(opt.corpus);
    for_each_record(in, parse_format(opt.format),
                    [&](AnnotatedMessage&& rec, const std::string&, std::size_t) {
                      ++total;
                      rec.message.tokens = tokenize(rec.message.text);
                      for (std::size_t r = 0; r < book.rules.size(); ++r) {
                        if (match_rule(book.rules[r], rec.message.tokens, book)) ++matches[r];
                      }
                    });
  }
  OutputFile out(opt.out);
  out.stream() << "# " << config_stamp("rules-check", opt) << '\n';
  out.stream() << "rule\tcategory\telements\tguards\tmatches\tmessages\n";
  for (std::size_t r = 0; r < book.rules.size(); ++r) {
    const Rule& rule = book.rules[r];
    out.stream() << rule.name << '\t' << category_letter(rule.category) << '\t'
                 << rule.elements.size() << '\t' << rule.guards.size() << '\t' << matches[r]
                 << '\t' << total << '\n';
  }
  out.commit();
  std::cerr << "rules-check: " << book.rules.size() << " rules, " << book.lists.size()
            << " lists ok\n";
  return kExitOk;
}

struct CategoryItems {
  std::vector<const AnnotatedMessage*> items;
  std::vector<Polarity> labels;
  long long positives = 0;
};

std::array<CategoryItems, kNumCategories> split_by_category(
    const std::vector<AnnotatedMessage>& corpus) {
  std::array<CategoryItems, kNumCategories> out;
  for (const AnnotatedMessage& m : corpus) {
    for (Category c : kAllCategories) {
      const auto p = m.labels.get(c);
      if (!p.has_value()) continue;
      CategoryItems& ci = out[static_cast<std::size_t>(c)];
      ci.items.push_back(&m);
      ci.labels.push_back(*p);
      if (*p == Polarity::positive) ++ci.positives;
    }
  }
  return out;
}

struct FitResult {
  AnyModel model;
  Vocabulary vocab;
};

// Shared by cv and train: vocabulary from the training items, vectors,
// optional undersampling of the fitted set, then NB or SVM (grid-searched
// when no fixed parameters are given).
FitResult fit_category(const std::vector<const AnnotatedMessage*>& train_items,
                       const std::vector<Polarity>& train_labels, const FeatureConfig& config,
                       const RuleBook& book_c, Category category, const Options& opt,
                       std::uint64_t seed) {
  std::vector<const Message*> msgs;
  msgs.reserve(train_items.size());
  for (const AnnotatedMessage* m : train_items) msgs.push_back(&m->message);
  FitResult fit;
  fit.vocab = build_vocab(msgs, config, book_c, opt.min_df);

  Dataset data;
  data.category = category;
  data.dimension = fit.vocab.dimension();
  data.vectors.reserve(train_items.size());
  for (const AnnotatedMessage* m : train_items) {
    data.vectors.push_back(vectorize(m->message, fit.vocab, book_c));
  }
  data.labels = train_labels;
  if (opt.undersample_flag) data = undersample(data, mix_seed(seed, 0xba1a));

  const auto kind = classifier_kind_from(opt.classifier);
  if (!kind.has_value()) throw validation_error("unknown classifier \"" + opt.classifier + "\"");
  if (*kind == ClassifierKind::nb) {
    NBModel nb = train_nb(data);
    nb.vocab_hash = vocab_hash(fit.vocab);
    fit.model = std::move(nb);
    return fit;
  }
  double c = opt.svm_c;
  double gamma = opt.svm_gamma;
  if (c <= 0.0 || gamma <= 0.0) {
    const auto cs = default_c_grid();
    const auto gs = default_gamma_grid();
    const GridChoice choice = grid_search(data, cs, gs, opt.inner_folds, mix_seed(seed, 0x9110));
    c = choice.c;
    gamma = choice.gamma;
  }
  SVMModel svm = train_svm(data, c, gamma, mix_seed(seed, 0x5400));
  svm.vocab_hash = vocab_hash(fit.vocab);
  fit.model = std::move(svm);
  return fit;
}

int cmd_cv(const Options& opt) {
  require_input(opt.corpus, "--corpus");
  const CorpusFormat format = parse_format(opt.format);
  std::ifstream in = open_input(opt.corpus);
  std::vector<AnnotatedMessage> corpus = parse_corpus(in, format);
  for (AnnotatedMessage& m : corpus) m.message.tokens = tokenize(m.message.text);

  std::vector<FeatureConfig> configs;
  {
    std::istringstream ss(opt.cv_features);
    std::string part;
    while (std::getline(ss, part, ',')) {
      const auto cfg = feature_config_from(part);
      if (!cfg.has_value()) throw validation_error("unknown feature config \"" + part + "\"");
      configs.push_back(*cfg);
    }
    if (configs.empty()) throw validation_error("no feature configs requested");
  }
  bool wants_rules = false;
  for (const FeatureConfig& c : configs) wants_rules |= c.use_rules;
  RuleBook book;
  if (wants_rules) book = resolve_rulebook(opt);

  const std::map<Category, int> folds = parse_folds(opt.folds);
  const auto by_category = split_by_category(corpus);

  OutputFile out(opt.out);
  out.stream() << "# " << config_stamp("cv", opt) << '\n';
  out.stream() << "category\tfeatures\tprecision\trecall\tf1\tfolds\tpositives\tnegatives\n";
  std::size_t evaluated = 0;
  for (Category cat : kAllCategories) {
    const CategoryItems& ci = by_category[static_cast<std::size_t>(cat)];
    if (ci.items.empty()) continue;
    const long long negatives = static_cast<long long>(ci.labels.size()) - ci.positives;
    if (ci.positives == 0 || negatives == 0) {
      std::cerr << "cv: skipping category " << category_letter(cat)
                << " (needs both polarities)\n";
      continue;
    }
    const int k = folds.at(cat);
    if (std::min(ci.positives, negatives) < k) {
      std::cerr << "cv: skipping category " << category_letter(cat) << " (" << k
                << " folds infeasible with " << std::min(ci.positives, negatives)
                << " minority items)\n";
      continue;
    }
    const RuleBook book_c = book.rules_for(cat);
    for (const FeatureConfig& config : configs) {
      std::uint64_t call = 0;
      const std::uint64_t cat_seed =
          mix_seed(opt.seed, static_cast<std::uint64_t>(cat) * 101 +
                                 fnv1a(config.label()) % 9973);
      const CvTrainer trainer = [&](std::span<const std::size_t> train_idx) {
        std::vector<const AnnotatedMessage*> items;
        std::vector<Polarity> labels;
        items.reserve(train_idx.size());
        for (std::size_t i : train_idx) {
          items.push_back(ci.items[i]);
          labels.push_back(ci.labels[i]);
        }
        auto fit = std::make_shared<FitResult>(
            fit_category(items, labels, config, book_c, cat, opt, mix_seed(cat_seed, call++)));
        return [fit, &ci, &book_c](std::size_t i) {
          const FeatureVector v = vectorize(ci.items[i]->message, fit->vocab, book_c);
          return predict(fit->model, v).polarity;
        };
      };
      const CvResult result = cross_validate(ci.labels, k, cat_seed, trainer);
      out.stream() << category_letter(cat) << '\t' << config.label() << '\t'
                   << fmt(result.pooled_metrics.precision) << '\t'
                   << fmt(result.pooled_metrics.recall) << '\t' << fmt(result.pooled_metrics.f1)
                   << '\t' << k << '\t' << ci.positives << '\t' << negatives << '\n';
      ++evaluated;
    }
  }
  if (evaluated == 0) throw validation_error("no category could be cross-validated");
  out.commit();
  return kExitOk;
}

int cmd_train(const Options& opt) {
  require_input(opt.corpus, "--corpus");
  require_input(opt.model_dir, "--model-dir");
  const CorpusFormat format = parse_format(opt.format);
  std::ifstream in = open_input(opt.corpus);
  std::vector<AnnotatedMessage> corpus = parse_corpus(in, format);
  for (AnnotatedMessage& m : corpus) m.message.tokens = tokenize(m.message.text);

  const auto cfg = feature_config_from(opt.features);
  if (!cfg.has_value()) throw validation_error("unknown feature config \"" + opt.features + "\"");
  RuleBook book;
  if (cfg->use_rules) book = resolve_rulebook(opt);

  fs::create_directories(opt.model_dir);
  const auto by_category = split_by_category(corpus);
  const std::string stamp = config_stamp("train", opt);

  std::ostringstream summary;
  summary << "# " << stamp << '\n';
  summary << "category\tclassifier\tfeatures\tpositives\tnegatives\tdimension\n";
  std::size_t trained = 0;
  for (Category cat : kAllCategories) {
    const CategoryItems& ci = by_category[static_cast<std::size_t>(cat)];
    const long long negatives = static_cast<long long>(ci.labels.size()) - ci.positives;
    if (ci.items.empty() || ci.positives == 0 || negatives == 0) {
      if (!ci.items.empty()) {
        std::cerr << "train: skipping category " << category_letter(cat)
                  << " (needs both polarities)\n";
      }
      continue;
    }
    const RuleBook book_c = book.rules_for(cat);
    const std::uint64_t cat_seed = mix_seed(opt.seed, static_cast<std::uint64_t>(cat));
    const FitResult fit = fit_category(ci.items, ci.labels, *cfg, book_c, cat, opt, cat_seed);
    const char letter = category_letter(cat);

    OutputFile vocab_out(opt.model_dir + "/vocab-" + letter + ".txt");
    vocab_out.stream() << "# " << stamp << '\n';
    save_vocabulary(vocab_out.stream(), fit.vocab);
    vocab_out.commit();

    OutputFile model_out(opt.model_dir + "/model-" + letter + ".txt");
    model_out.stream() << "# " << stamp << '\n';
    save_model(model_out.stream(), fit.model);
    model_out.commit();

    if (cfg->use_rules) {
      OutputFile rules_out(opt.model_dir + "/rules-" + letter + ".srl");
      rules_out.stream() << "# " << stamp << '\n' << serialize_rulebook(book_c);
      rules_out.commit();
    }
    summary << letter << '\t' << opt.classifier << '\t' << cfg->label() << '\t' << ci.positives
            << '\t' << negatives << '\t' << fit.vocab.dimension() << '\n';
    ++trained;
  }
  if (trained == 0) throw validation_error("no category had both polarities; nothing trained");
  OutputFile summary_out(opt.model_dir + "/train-summary.tsv");
  summary_out.stream() << summary.str();
  summary_out.commit();
  std::cerr << "train: wrote " << trained << " models to " << opt.model_dir << '\n';
  return kExitOk;
}

struct LoadedCategoryModel {
  Category category = Category::A;
  Vocabulary vocab;
  RuleBook book;
  AnyModel model;
};

std::vector<LoadedCategoryModel> load_models(const std::string& model_dir) {
  std::vector<LoadedCategoryModel> out;
  for (Category cat : kAllCategories) {
    const char letter = category_letter(cat);
    const std::string model_path = model_dir + "/model-" + letter + ".txt";
    if (!fs::exists(model_path)) continue;
    LoadedCategoryModel m;
    m.category = cat;
    std::ifstream model_in = open_input(model_path);
    m.model = load_model(model_in);
    std::ifstream vocab_in = open_input(model_dir + "/vocab-" + letter + ".txt");
    m.vocab = load_vocabulary(vocab_in);
    if (model_vocab_hash(m.model) != vocab_hash(m.vocab)) {
      throw validation_error(std::string("model-") + letter +
                             " does not match its vocabulary (hash mismatch)");
    }
    const std::string rules_path = model_dir + "/rules-" + letter + ".srl";
    if (m.vocab.config().use_rules && !m.vocab.rule_names().empty()) {
      if (!fs::exists(rules_path)) {
        throw validation_error(std::string("vocab-") + letter +
                               " uses rules but rules-" + letter + ".srl is missing");
      }
      std::ifstream rules_in = open_input(rules_path);
      m.book = load_rulebook(rules_in);
    }
    out.push_back(std::move(m));
  }
  if (out.empty()) throw validation_error("no models found in " + model_dir);
  return out;
}

int cmd_predict(const Options& opt) {
  require_input(opt.corpus, "--corpus");
  require_input(opt.model_dir, "--model-dir");
  const CorpusFormat format = parse_format(opt.format);
  const std::vector<LoadedCategoryModel> models = load_models(opt.model_dir);
  std::ifstream in = open_input(opt.corpus);
  OutputFile out(opt.out);
  out.stream() << "# " << config_stamp("predict", opt) << '\n';
  std::size_t n = 0;
  for_each_record(in, format,
                  [&](AnnotatedMessage&& rec, const std::string&, std::size_t) {
                    rec.message.tokens = tokenize(rec.message.text);
                    AnnotatedMessage labeled;
                    labeled.message = std::move(rec.message);
                    for (const LoadedCategoryModel& m : models) {
                      const FeatureVector v = vectorize(labeled.message, m.vocab, m.book);
                      labeled.labels.set(m.category, predict(m.model, v).polarity);
                    }
                    write_record(out.stream(), labeled, format);
                    ++n;
                  });
  out.commit();
  std::cerr << "predict: labeled " << n << " messages with " << models.size() << " models\n";
  return kExitOk;
}

int cmd_aggregate(const Options& opt) {
  require_input(opt.corpus, "--corpus");
  const CorpusFormat format = parse_format(opt.format);
  std::ifstream in = open_input(opt.corpus);
  // Streaming: only week buckets are held, the corpus itself is not.
  std::map<EpiWeek, std::array<long long, kNumCategories>> buckets;
  std::size_t total = 0;
  for_each_record(in, format, [&](AnnotatedMessage&& rec, const std::string&, std::size_t) {
    ++total;
    const EpiWeek wk = epiweek_of(rec.message.timestamp);
    auto& row = buckets.try_emplace(wk).first->second;
    for (Category c : kAllCategories) {
      if (rec.labels.positive(c)) ++row[static_cast<std::size_t>(c)];
    }
  });
  WeeklySeries series;
  if (!buckets.empty()) {
    const EpiWeek last = buckets.rbegin()->first;
    for (EpiWeek wk = buckets.begin()->first;; wk = next_week(wk)) {
      series.weeks.push_back(wk);
      const auto it = buckets.find(wk);
      for (std::size_t c = 0; c < kNumCategories; ++c) {
        series.counts[c].push_back(it != buckets.end() ? it->second[c] : 0);
      }
      if (wk == last) break;
    }
  }
  OutputFile out(opt.out);
  save_counts_csv(out.stream(), series, config_stamp("aggregate", opt));
  out.commit();
  std::cerr << "aggregate: " << total << " messages over " << series.weeks.size() << " weeks\n";
  return kExitOk;
}

int cmd_correlate(const Options& opt) {
  require_input(opt.counts, "--counts");
  require_input(opt.baseline, "--baseline");
  std::ifstream counts_in = open_input(opt.counts);
  WeeklySeries series = load_counts_csv(counts_in);
  std::ifstream baseline_in = open_input(opt.baseline);
  attach_baseline_csv(series, baseline_in);
  const auto sets = parse_category_sets(opt.sets);
  const auto results = correlate(series, sets);
  OutputFile out(opt.out);
  save_correlation_tsv(out.stream(), results, config_stamp("correlate", opt));
  out.commit();
  return kExitOk;
}

int cmd_kappa(const Options& opt) {
  OutputFile out(opt.out);
  if (opt.pa >= 0.0 || opt.pe >= 0.0) {
    if (opt.pa < 0.0 || opt.pe < 0.0) {
      throw validation_error("--pa and --pe must be given together");
    }
    out.stream() << "# " << config_stamp("kappa", opt) << '\n';
    out.stream() << "pa\tpe\tkappa\n";
    out.stream() << fmt(opt.pa) << '\t' << fmt(opt.pe) << '\t' << fmt(kappa_from(opt.pa, opt.pe))
                 << '\n';
    out.commit();
    return kExitOk;
  }
  if (opt.annotations_a.empty() || opt.annotations_b.empty()) {
    throw validation_error("kappa needs two annotation files or --pa/--pe");
  }
  const CorpusFormat format = parse_format(opt.format);
  std::ifstream in_a = open_input(opt.annotations_a);
  const std::vector<AnnotatedMessage> a = parse_corpus(in_a, format);
  std::ifstream in_b = open_input(opt.annotations_b);
  const std::vector<AnnotatedMessage> b = parse_corpus(in_b, format);
  std::map<std::string, const AnnotatedMessage*> b_by_id;
  for (const AnnotatedMessage& m : b) b_by_id[m.message.id] = &m;

  std::array<std::vector<std::string>, kNumCategories> marks_a;
  std::array<std::vector<std::string>, kNumCategories> marks_b;
  std::vector<std::string> all_a;
  std::vector<std::string> all_b;
  for (const AnnotatedMessage& m : a) {
    const auto it = b_by_id.find(m.message.id);
    if (it == b_by_id.end()) continue;
    for (Category c : kAllCategories) {
      const auto pa = m.labels.get(c);
      const auto pb = it->second->labels.get(c);
      if (!pa.has_value() || !pb.has_value()) continue;
      const std::size_t ci = static_cast<std::size_t>(c);
      marks_a[ci].push_back(*pa == Polarity::positive ? "+" : "-");
      marks_b[ci].push_back(*pb == Polarity::positive ? "+" : "-");
      all_a.push_back(marks_a[ci].back());
      all_b.push_back(marks_b[ci].back());
    }
  }
  if (all_a.empty()) throw validation_error("no jointly annotated (id, category) pairs");
  out.stream() << "# " << config_stamp("kappa", opt) << '\n';
  out.stream() << "category\tpa\tpe\tkappa\tn\n";
  for (Category c : kAllCategories) {
    const std::size_t ci = static_cast<std::size_t>(c);
    if (marks_a[ci].empty()) continue;
    const AgreementResult r = cohens_kappa(marks_a[ci], marks_b[ci]);
    out.stream() << category_letter(c) << '\t' << fmt(r.observed) << '\t' << fmt(r.expected)
                 << '\t' << fmt(r.kappa) << '\t' << r.n << '\n';
  }
  const AgreementResult overall = cohens_kappa(all_a, all_b);
  out.stream() << "all\t" << fmt(overall.observed) << '\t' << fmt(overall.expected) << '\t'
               << fmt(overall.kappa) << '\t' << overall.n << '\n';
  out.commit();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"short-message health-behaviour classification and surveillance toolkit"};
  app.require_subcommand(1);

  Options opt;
  std::string command;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "JSON config file; flags override its values");
    cmd->add_option("--seed", opt.seed, "seed for every random choice");
    cmd->add_option("--out", opt.out, "output path (default: stdout)");
    cmd->parse_complete_callback([cmd, &command] { command = cmd->get_name(); });
  };

  CLI::App* filter = app.add_subcommand("filter", "keep messages hitting the topical keyword bag");
  filter->add_option("--corpus", opt.corpus, "input corpus");
  filter->add_option("--format", opt.format, "jsonl|tsv");
  filter->add_option("--keywords", opt.keywords, "keyword bag file (default: built-in bag)");
  filter->add_flag("--dedupe", opt.dedupe_flag, "drop normalized-text duplicates");
  add_common(filter);

  CLI::App* rules = app.add_subcommand("rules-check", "validate a rulebook, count matches");
  rules->add_option("--rulebook", opt.rulebook, "rulebook file");
  rules->add_option("--corpus", opt.corpus, "optional corpus to count matches against");
  rules->add_option("--format", opt.format, "jsonl|tsv");
  add_common(rules);

  CLI::App* cv = app.add_subcommand("cv", "stratified cross-validated precision/recall/F1");
  cv->add_option("--corpus", opt.corpus, "labeled corpus");
  cv->add_option("--format", opt.format, "jsonl|tsv");
  cv->add_option("--rulebook", opt.rulebook, "rulebook (needed for rule features)");
  cv->add_option("--classifier", opt.classifier, "nb|svm");
  cv->add_option("--features", opt.cv_features, "comma-separated feature configs");
  cv->add_option("--folds", opt.folds, "per-category folds, e.g. A=10,I=3");
  cv->add_option("--min-df", opt.min_df, "minimum document frequency for grams");
  cv->add_flag("--undersample", opt.undersample_flag, "balance each training fold");
  cv->add_option("--svm-c", opt.svm_c, "fixed SVM C (0 = grid search)");
  cv->add_option("--svm-gamma", opt.svm_gamma, "fixed SVM gamma (0 = grid search)");
  cv->add_option("--inner-folds", opt.inner_folds, "grid-search inner folds");
  add_common(cv);

  CLI::App* train = app.add_subcommand("train", "train per-category models");
  train->add_option("--corpus", opt.corpus, "labeled corpus");
  train->add_option("--format", opt.format, "jsonl|tsv");
  train->add_option("--rulebook", opt.rulebook, "rulebook (needed for rule features)");
  train->add_option("--classifier", opt.classifier, "nb|svm");
  train->add_option("--features", opt.features, "feature config, e.g. uni+bi+rules");
  train->add_option("--model-dir", opt.model_dir, "output directory");
  train->add_option("--min-df", opt.min_df, "minimum document frequency for grams");
  train->add_flag("--undersample", opt.undersample_flag, "balance the training data");
  train->add_option("--svm-c", opt.svm_c, "fixed SVM C (0 = grid search)");
  train->add_option("--svm-gamma", opt.svm_gamma, "fixed SVM gamma (0 = grid search)");
  train->add_option("--inner-folds", opt.inner_folds, "grid-search inner folds");
  add_common(train);

  CLI::App* predict = app.add_subcommand("predict", "label a corpus with trained models");
  predict->add_option("--corpus", opt.corpus, "input corpus");
  predict->add_option("--format", opt.format, "jsonl|tsv");
  predict->add_option("--model-dir", opt.model_dir, "directory from `train`");
  add_common(predict);

  CLI::App* aggregate = app.add_subcommand("aggregate", "weekly positive counts per category");
  aggregate->add_option("--corpus", opt.corpus, "labeled corpus");
  aggregate->add_option("--format", opt.format, "jsonl|tsv");
  add_common(aggregate);

  CLI::App* correlate_cmd = app.add_subcommand("correlate", "rank-correlate counts with a baseline");
  correlate_cmd->add_option("--counts", opt.counts, "weekly counts csv");
  correlate_cmd->add_option("--baseline", opt.baseline, "baseline csv (week,count)");
  correlate_cmd->add_option("--sets", opt.sets, "category sets, e.g. A,S,A+I+P");
  add_common(correlate_cmd);

  CLI::App* kappa = app.add_subcommand("kappa", "inter-annotator agreement");
  kappa->add_option("file_a", opt.annotations_a, "first annotation file");
  kappa->add_option("file_b", opt.annotations_b, "second annotation file");
  kappa->add_option("--format", opt.format, "jsonl|tsv");
  kappa->add_option("--pa", opt.pa, "observed agreement (skip the files)");
  kappa->add_option("--pe", opt.pe, "expected agreement (skip the files)");
  add_common(kappa);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_config_file(*sub, opt);
    if (command == "filter") return cmd_filter(opt);
    if (command == "rules-check") return cmd_rules_check(opt);
    if (command == "cv") return cmd_cv(opt);
    if (command == "train") return cmd_train(opt);
    if (command == "predict") return cmd_predict(opt);
    if (command == "aggregate") return cmd_aggregate(opt);
    if (command == "correlate") return cmd_correlate(opt);
    if (command == "kappa") return cmd_kappa(opt);
    std::cerr << "unknown command\n";
    return kExitUsage;
  } catch (const usage_error& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const parse_error& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitData;
  } catch (const validation_error& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const error& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitValidation;
  }
}
