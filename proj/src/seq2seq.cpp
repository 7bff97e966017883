#include "socq/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "socq/text.hpp"

namespace socq::seq2seq {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<Variant, std::string_view> kVariantNames[] = {
    {Variant::TextOnly, "text_only"},
    {Variant::SocialToken, "social_token"},
    {Variant::SocialAttention, "social_attention"},
    {Variant::SubredditEmbedding, "subreddit_embedding"},
    {Variant::TextEmbedding, "text_embedding"},
};

const char* kSpecialWords[] = {"<pad>", "<s>", "</s>", "<unk>", "[SOCIAL_EMB]"};

bool uses_asker_vector(Variant v) {
  return v == Variant::SubredditEmbedding || v == Variant::TextEmbedding;
}

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& [k, name] : kVariantNames)
    if (k == v) return name;
  return "text_only";
}

Variant parse_variant(std::string_view s) {
  for (const auto& [k, name] : kVariantNames)
    if (name == s) return k;
  throw std::invalid_argument("unknown model variant '" + std::string(s) + "'");
}

std::string ModelConfig::to_json() const {
  json j{{"variant", std::string(seq2seq::to_string(variant))},
         {"base_model", base_model},
         {"learning_rate", learning_rate},
         {"weight_decay", weight_decay},
         {"epochs", epochs},
         {"batch_size", batch_size},
         {"max_source", max_source},
         {"max_target", max_target},
         {"attention_layer", attention_layer},
         {"select_layer", select_layer},
         {"model_dim", model_dim},
         {"layers", layers},
         {"heads", heads},
         {"ffn_dim", ffn_dim},
         {"category", std::string(socq::to_string(category))},
         {"min_count", min_count},
         {"beam_width", beam_width},
         {"seed", seed}};
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  const auto j = json::parse(text);
  ModelConfig c;
  if (j.contains("variant")) c.variant = parse_variant(j["variant"].get<std::string>());
  c.base_model = j.value("base_model", c.base_model);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_source = j.value("max_source", c.max_source);
  c.max_target = j.value("max_target", c.max_target);
  c.attention_layer = j.value("attention_layer", c.attention_layer);
  c.select_layer = j.value("select_layer", c.select_layer);
  c.model_dim = j.value("model_dim", c.model_dim);
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  if (j.contains("category")) c.category = parse_category(j["category"].get<std::string>());
  c.min_count = j.value("min_count", c.min_count);
  c.beam_width = j.value("beam_width", c.beam_width);
  c.seed = j.value("seed", c.seed);
  if (c.batch_size <= 0 || c.epochs < 0 || c.max_source < 3 || c.max_target < 1 || c.beam_width < 1)
    throw std::invalid_argument("model config: invalid sizes");
  return c;
}

ModelConfig ModelConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string group_token(GroupCategory category, GroupValue value) {
  return "{GROUP_" + std::string(socq::to_string(category)) + "_" + std::string(socq::to_string(value)) + "}";
}

// ---------------------------------------------------------------- vocabulary

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, int min_count,
                             bool with_group_tokens) {
  Vocabulary v;
  for (const char* w : kSpecialWords) v.words_.emplace_back(w);
  if (with_group_tokens) {
    for (auto c : all_categories())
      for (auto g : values_of(c)) v.words_.push_back(group_token(c, g));
    v.group_count_ = static_cast<int>(v.words_.size()) - kSpecialCount;
  }
  std::map<std::string, int> counts;
  for (const auto& t : texts)
    for (auto& w : text::tokenize(t)) ++counts[w];
  std::set<std::string> reserved(v.words_.begin(), v.words_.end());
  for (const auto& [w, c] : counts)
    if (c >= min_count && !reserved.contains(w)) v.words_.push_back(w);
  v.index();
  return v;
}

void Vocabulary::index() {
  ids_.clear();
  for (std::size_t i = 0; i < words_.size(); ++i) ids_.emplace(words_[i], static_cast<int>(i));
}

int Vocabulary::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnk : it->second;
}

int Vocabulary::group_token_id(GroupCategory category, GroupValue value) const {
  if (!is_legal(category, value)) throw InvalidGroup("illegal group label");
  auto it = ids_.find(group_token(category, value));
  if (it == ids_.end()) throw std::logic_error("vocabulary has no group tokens");
  return it->second;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> out;
  for (const auto& w : text::tokenize(text)) out.push_back(id(w));
  return out;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> toks;
  for (int i : ids) {
    if (i == kEos) break;
    if (i < kSpecialCount) continue;
    toks.push_back(word(i));
  }
  return text::detokenize(toks);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "#group_tokens " << group_count_ << '\n';
  for (const auto& w : words_) out << w << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Vocabulary v;
  std::string line;
  std::getline(in, line);
  if (line.rfind("#group_tokens ", 0) != 0) throw std::runtime_error(path + ": bad vocabulary header");
  v.group_count_ = std::stoi(line.substr(14));
  while (std::getline(in, line)) v.words_.push_back(line);
  if (v.words_.size() < static_cast<std::size_t>(kSpecialCount + v.group_count_))
    throw std::runtime_error(path + ": truncated vocabulary");
  v.index();
  return v;
}

// ------------------------------------------------------------ input building

std::vector<int> prepare_social_token_input(const Vocabulary& vocab, const std::string& post_text,
                                            GroupCategory category, GroupValue value,
                                            int max_source) {
  std::vector<int> ids{vocab.group_token_id(category, value)};
  for (int id : vocab.encode(post_text)) {
    if (static_cast<int>(ids.size()) >= max_source) break;
    ids.push_back(id);
  }
  return ids;
}

SocialEmbeddingInput prepare_social_embedding_input(const Vocabulary& vocab,
                                                    const std::string& post_text,
                                                    const std::optional<std::vector<double>>& asker_vec,
                                                    const nn::Linear& projector, int max_source) {
  SocialEmbeddingInput in;
  in.ids = vocab.encode(post_text);
  if (static_cast<int>(in.ids.size()) > max_source - 2) in.ids.resize(static_cast<std::size_t>(max_source - 2));
  const int in_dim = projector.w->rows;
  if (asker_vec) {
    if (static_cast<int>(asker_vec->size()) != in_dim)
      throw std::invalid_argument("asker vector has " + std::to_string(asker_vec->size()) +
                                  " values, projector expects " + std::to_string(in_dim));
    in.ids.push_back(kSocialEmb);
    in.vector = projector.forward(nn::make_tensor(1, in_dim, *asker_vec));
  } else {
    in.ids.push_back(kUnk);
    in.vector = projector.forward(nn::make_tensor(1, in_dim));
  }
  return in;
}

// --------------------------------------------------------------------- model

Model::Model(const ModelConfig& config, Vocabulary vocab) : config_(config), vocab_(std::move(vocab)) {
  nn::TransformerShape shape;
  shape.vocab_size = vocab_.size();
  shape.dim = config.model_dim;
  shape.layers = config.layers;
  shape.heads = config.heads;
  shape.ffn = config.ffn_dim > 0 ? config.ffn_dim : 4 * config.model_dim;
  shape.max_source_positions = config.max_source;
  shape.max_target_positions = config.max_target + 1;
  net_ = std::make_unique<nn::Seq2SeqTransformer>(shape, config.seed);
  if (config.variant == Variant::SocialToken && !vocab_.has_group_tokens())
    throw std::invalid_argument("social_token model needs a vocabulary with group tokens");
  if (config.variant == Variant::SocialAttention) enable_social_attention(config.attention_layer);
  if (uses_asker_vector(config.variant)) {
    nn::Rng rng(config.seed ^ 0x5eed5eedULL);
    projector_.emplace(kAskerEmbeddingDim, config.model_dim, true, rng);
  }
}

void Model::enable_social_attention(int layer) {
  net_->enable_social_attention(layer, config_.category, config_.seed + 101);
  config_.attention_layer = layer;
}

nn::NamedParams Model::parameters() const {
  auto p = net_->parameters();
  if (projector_) projector_->collect("projector", p);
  return p;
}

Model::EncoderInput Model::encoder_input(const std::string& source, GroupValue group,
                                         const std::optional<std::vector<double>>& asker_vec) const {
  EncoderInput in;
  switch (config_.variant) {
    case Variant::SocialToken:
      in.ids = prepare_social_token_input(vocab_, source, config_.category,
                                          is_legal(config_.category, group) ? group : GroupValue::UNK,
                                          config_.max_source);
      break;
    case Variant::SubredditEmbedding:
    case Variant::TextEmbedding: {
      auto s = prepare_social_embedding_input(vocab_, source, asker_vec, *projector_, config_.max_source);
      in.ids = std::move(s.ids);
      in.extra = s.vector;
      break;
    }
    case Variant::SocialAttention:
      in.group = group;
      [[fallthrough]];
    case Variant::TextOnly:
      in.ids = vocab_.encode(source);
      if (static_cast<int>(in.ids.size()) > config_.max_source)
        in.ids.resize(static_cast<std::size_t>(config_.max_source));
      break;
  }
  return in;
}

nn::TensorPtr Model::loss(const ConditionedExample& ex) const {
  auto in = encoder_input(ex);
  auto tgt = vocab_.encode(ex.target);
  if (static_cast<int>(tgt.size()) > target_limit()) tgt.resize(static_cast<std::size_t>(target_limit()));
  std::vector<int> prefix{kBos};
  prefix.insert(prefix.end(), tgt.begin(), tgt.end());
  tgt.push_back(kEos);
  auto memory = net_->encode(in.ids, in.extra, in.group);
  return nn::cross_entropy(net_->decode(memory, prefix), tgt);
}

std::vector<double> Model::target_log_probs(const ConditionedExample& ex) const {
  nn::NoGradGuard guard;
  auto in = encoder_input(ex);
  auto tgt = vocab_.encode(ex.target);
  if (static_cast<int>(tgt.size()) > target_limit()) tgt.resize(static_cast<std::size_t>(target_limit()));
  std::vector<int> prefix{kBos};
  prefix.insert(prefix.end(), tgt.begin(), tgt.end());
  tgt.push_back(kEos);
  auto logits = net_->decode(net_->encode(in.ids, in.extra, in.group), prefix);
  std::vector<double> out;
  for (std::size_t r = 0; r < tgt.size(); ++r)
    out.push_back(nn::log_softmax_row(*logits, static_cast<int>(r))[static_cast<std::size_t>(tgt[r])]);
  return out;
}

std::vector<int> Model::generate_ids(const ConditionedExample& ex) const {
  nn::NoGradGuard guard;
  auto in = encoder_input(ex);
  if (in.ids.empty() && !in.extra) in.ids.push_back(kUnk);  // degenerate empty post
  auto memory = net_->encode(in.ids, in.extra, in.group);

  struct Hyp {
    std::vector<int> toks;
    double logp = 0.0;
  };
  const auto width = static_cast<std::size_t>(config_.beam_width);
  const int vocab = vocab_.size();
  std::vector<Hyp> beams{Hyp{}};
  std::vector<Hyp> finished;
  for (int step = 0; step < target_limit(); ++step) {
    struct Cand {
      double score;
      std::size_t beam;
      int token;
    };
    std::vector<Cand> cands;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      std::vector<int> prefix{kBos};
      prefix.insert(prefix.end(), beams[b].toks.begin(), beams[b].toks.end());
      auto logits = net_->decode(memory, prefix);
      auto lp = nn::log_softmax_row(*logits, logits->rows - 1);
      std::vector<Cand> local;
      for (int t = 0; t < vocab; ++t) {
        if (t == kEos ? step == 0 : vocab_.is_special(t)) continue;
        local.push_back({beams[b].logp + lp[static_cast<std::size_t>(t)], b, t});
      }
      const auto keep = std::min(local.size(), 2 * width);
      std::partial_sort(local.begin(), local.begin() + static_cast<long>(keep), local.end(),
                        [](const Cand& x, const Cand& y) {
                          return x.score != y.score ? x.score > y.score : x.token < y.token;
                        });
      cands.insert(cands.end(), local.begin(), local.begin() + static_cast<long>(keep));
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.score != y.score) return x.score > y.score;
      if (x.beam != y.beam) return x.beam < y.beam;
      return x.token < y.token;
    });
    std::vector<Hyp> next;
    for (const auto& c : cands) {
      if (next.size() >= width) break;
      Hyp h{beams[c.beam].toks, c.score};
      if (c.token == kEos) {
        if (finished.size() < width) finished.push_back(std::move(h));
      } else {
        h.toks.push_back(c.token);
        next.push_back(std::move(h));
      }
    }
    beams = std::move(next);
    if (finished.size() >= width || beams.empty()) break;
  }
  if (finished.empty()) finished = beams;
  const Hyp* best = nullptr;
  double best_score = -INFINITY;
  for (const auto& h : finished) {
    const double s = h.logp / static_cast<double>(h.toks.size() + 1);
    if (!best || s > best_score) {
      best = &h;
      best_score = s;
    }
  }
  return best->toks;
}

std::string Model::generate(const ConditionedExample& ex) const {
  auto ids = generate_ids(ex);
  auto s = vocab_.decode(ids);
  return s.empty() ? vocab_.word(kUnk) : s;
}

std::vector<AttentionScore> Model::attention_ratio(const std::string& post) const {
  if (config_.variant != Variant::SocialToken)
    throw std::logic_error("attention ratios need a social_token model");
  nn::NoGradGuard guard;
  const auto& values = values_of(config_.category);
  std::vector<std::vector<double>> scores;
  std::size_t length = 0;
  for (int side = 0; side < 2; ++side) {
    auto ids = prepare_social_token_input(vocab_, post, config_.category, values[static_cast<std::size_t>(side)],
                                          config_.max_source);
    std::vector<nn::AttentionMaps> maps;
    net_->encode(ids, nullptr, GroupValue::UNK, &maps);
    const auto& first = maps.front();
    const std::size_t n = ids.size();
    length = n;
    std::vector<double> s(n, 0.0);
    for (const auto& head : first)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s[j] += head[i * n + j];
    const double denom = static_cast<double>(first.size() * n);
    for (auto& x : s) x /= denom;
    // drop the group token and rescale the rest to a distribution
    s.erase(s.begin());
    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    if (total > 0)
      for (auto& x : s) x /= total;
    scores.push_back(std::move(s));
  }
  auto toks = text::tokenize(post);
  toks.resize(length - 1);
  std::vector<AttentionScore> out;
  for (std::size_t j = 0; j + 1 < length; ++j) {
    AttentionScore a{toks[j], scores[0][j], scores[1][j], 1.0};
    a.ratio = a.score_b > 0 ? a.score_a / a.score_b : (a.score_a > 0 ? INFINITY : 1.0);
    out.push_back(std::move(a));
  }
  return out;
}

// --------------------------------------------------------------- checkpoints

namespace {
constexpr char kWeightsMagic[8] = {'S', 'O', 'C', 'Q', 'W', 'T', '0', '1'};
}

void Model::save(const std::string& dir) const {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "config.json");
    if (!out) throw std::runtime_error("cannot write " + dir + "/config.json");
    auto c = config_;
    c.select_layer = false;
    out << c.to_json() << '\n';
  }
  vocab_.save((fs::path(dir) / "vocab.txt").string());
  std::ofstream out(fs::path(dir) / "weights.bin", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + dir + "/weights.bin");
  auto params = parameters();
  out.write(kWeightsMagic, sizeof kWeightsMagic);
  const std::uint64_t n = params.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (const auto& [name, t] : params) {
    const std::uint32_t len = static_cast<std::uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(name.data(), len);
    const std::int32_t shape[2] = {t->rows, t->cols};
    out.write(reinterpret_cast<const char*>(shape), sizeof shape);
    out.write(reinterpret_cast<const char*>(t->value.data()),
              static_cast<std::streamsize>(t->value.size() * sizeof(double)));
  }
  std::ofstream(fs::path(dir) / "VERSION") << version() << '\n';
}

Model Model::load(const std::string& dir) {
  auto config = ModelConfig::load((fs::path(dir) / "config.json").string());
  config.select_layer = false;
  auto vocab = Vocabulary::load((fs::path(dir) / "vocab.txt").string());
  Model m(config, std::move(vocab));
  std::ifstream in(fs::path(dir) / "weights.bin", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + dir + "/weights.bin");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kWeightsMagic, sizeof magic) != 0)
    throw std::runtime_error(dir + "/weights.bin: not a weights file");
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  std::map<std::string, nn::TensorPtr> by_name;
  for (auto& [name, t] : m.parameters()) by_name[name] = t;
  if (n != by_name.size()) throw std::runtime_error(dir + "/weights.bin: parameter count mismatch");
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string name(len, '\0');
    in.read(name.data(), len);
    std::int32_t shape[2];
    in.read(reinterpret_cast<char*>(shape), sizeof shape);
    auto it = by_name.find(name);
    if (!in || it == by_name.end() || it->second->rows != shape[0] || it->second->cols != shape[1])
      throw std::runtime_error(dir + "/weights.bin: unexpected parameter '" + name + "'");
    in.read(reinterpret_cast<char*>(it->second->value.data()),
            static_cast<std::streamsize>(it->second->value.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error(dir + "/weights.bin: truncated");
  return m;
}

std::string Model::version() const {
  auto c = config_;
  c.select_layer = false;
  std::uint64_t h = text::fnv1a(c.to_json());
  for (int i = 0; i < vocab_.size(); ++i) h = text::fnv1a(vocab_.word(i), h);
  for (const auto& [name, t] : parameters()) {
    h = text::fnv1a(name, h);
    h = text::fnv1a(std::string_view(reinterpret_cast<const char*>(t->value.data()),
                                     t->value.size() * sizeof(double)),
                    h);
  }
  return hex64(h);
}

// ------------------------------------------------------------------ training

void AdamW::zero_grad(const nn::NamedParams& params) {
  for (const auto& [name, t] : params) t->zero_grad();
}

void AdamW::step(const nn::NamedParams& params) {
  for (const auto& [name, t] : params) {
    if (!t->grad_touched) continue;
    auto& s = state_[t.get()];
    if (s.m.empty()) {
      s.m.assign(t->size(), 0.0);
      s.v.assign(t->size(), 0.0);
    }
    ++s.t;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(s.t));
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double g = t->grad[i];
      s.m[i] = b1_ * s.m[i] + (1 - b1_) * g;
      s.v[i] = b2_ * s.v[i] + (1 - b2_) * g * g;
      t->value[i] -= lr_ * wd_ * t->value[i];
      t->value[i] -= lr_ * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + eps_);
    }
  }
}

double mean_loss(const Model& model, const std::vector<ConditionedExample>& set) {
  if (set.empty()) return 0.0;
  nn::NoGradGuard guard;
  double total = 0;
  for (const auto& ex : set) total += model.loss(ex)->value[0];
  return total / static_cast<double>(set.size());
}

TrainResult train_with_vocab(const ModelConfig& config, const Vocabulary& vocab,
                             const std::vector<ConditionedExample>& train_set,
                             const std::vector<ConditionedExample>& val_set) {
  if (train_set.empty()) throw EmptyDataset("training set is empty");
  TrainResult r;
  r.model = std::make_unique<Model>(config, vocab);
  auto& model = *r.model;
  const auto params = model.parameters();
  AdamW opt(config.learning_rate, config.weight_decay);
  nn::Rng rng(config.seed * 0x100000001B3ULL + 7);
  const auto& selection_set = val_set.empty() ? train_set : val_set;

  auto snapshot = [&] {
    std::vector<std::vector<double>> s;
    for (const auto& [n, t] : params) s.push_back(t->value);
    return s;
  };
  r.report.val_loss.push_back(mean_loss(model, selection_set));
  r.report.best_val_loss = r.report.val_loss[0];
  auto best = snapshot();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      AdamW::zero_grad(params);
      for (std::size_t i = start; i < end; ++i) {
        auto loss = model.loss(train_set[order[i]]);
        epoch_loss += loss->value[0];
        nn::backward(loss, 1.0 / static_cast<double>(end - start));
      }
      opt.step(params);
    }
    r.report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    const double v = mean_loss(model, selection_set);
    r.report.val_loss.push_back(v);
    if (v < r.report.best_val_loss) {
      r.report.best_val_loss = v;
      r.report.best_epoch = epoch;
      best = snapshot();
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i].second->value = best[i];
  AdamW::zero_grad(params);
  if (model.network().social_layer()) r.report.selected_layer = model.network().social_layer();
  return r;
}

TrainResult train(const ModelConfig& config, const std::vector<ConditionedExample>& train_set,
                  const std::vector<ConditionedExample>& val_set) {
  if (train_set.empty()) throw EmptyDataset("training set is empty");
  std::set<std::string> train_posts;
  for (const auto& ex : train_set) train_posts.insert(ex.post_id);
  for (const auto& ex : val_set)
    if (train_posts.contains(ex.post_id))
      throw std::invalid_argument("post " + ex.post_id + " appears in both training and validation");

  std::vector<std::string> texts;
  for (const auto& ex : train_set) {
    texts.push_back(ex.source);
    texts.push_back(ex.target);
  }
  const auto vocab = Vocabulary::build(texts, config.min_count, config.variant == Variant::SocialToken);

  if (config.variant != Variant::SocialAttention || !config.select_layer)
    return train_with_vocab(config, vocab, train_set, val_set);

  std::vector<int> candidates;
  for (int l : {1, 3, 5})
    if (l < config.layers) candidates.push_back(l);
  if (candidates.empty()) candidates.push_back(config.attention_layer);
  TrainResult best;
  std::map<int, double> tried;
  for (int l : candidates) {
    auto c = config;
    c.attention_layer = l;
    auto r = train_with_vocab(c, vocab, train_set, val_set);
    tried[l] = r.report.best_val_loss;
    if (!best.model || r.report.best_val_loss < best.report.best_val_loss) best = std::move(r);
  }
  best.report.layer_val_loss = tried;
  return best;
}

Split split_by_post(const std::vector<ConditionedExample>& examples, double train_frac,
                    double val_frac, std::uint64_t seed) {
  Split s;
  for (const auto& ex : examples) {
    std::uint64_t z = text::fnv1a(ex.post_id) ^ (seed * 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
    if (u < train_frac)
      s.train.push_back(ex);
    else if (u < train_frac + val_frac)
      s.validation.push_back(ex);
    else
      s.test.push_back(ex);
  }
  return s;
}

std::vector<ConditionedExample> read_examples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ConditionedExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      ConditionedExample ex;
      ex.id = j.value("id", std::to_string(lineno));
      ex.post_id = j.value("post_id", ex.id);
      ex.source = j.at("source").get<std::string>();
      ex.target = j.value("target", "");
      ex.group = parse_value(j.value("group", "UNK"));
      if (j.contains("asker_vec") && !j["asker_vec"].is_null())
        ex.asker_vec = j["asker_vec"].get<std::vector<double>>();
      out.push_back(std::move(ex));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_examples(const std::string& path, const std::vector<ConditionedExample>& examples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& ex : examples) {
    json j{{"id", ex.id},
           {"post_id", ex.post_id},
           {"source", ex.source},
           {"target", ex.target},
           {"group", std::string(socq::to_string(ex.group))}};
    if (ex.asker_vec) j["asker_vec"] = *ex.asker_vec;
    out << j.dump() << '\n';
  }
}

}  // namespace socq::seq2seq
