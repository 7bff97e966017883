#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "socq/corpus_ingest.hpp"
#include "socq/eval_harness.hpp"
#include "socq/group_analysis.hpp"
#include "socq/human_eval.hpp"
#include "socq/paragraph_vectors.hpp"
#include "socq/preview_service.hpp"
#include "socq/question_filter.hpp"
#include "socq/seq2seq.hpp"
#include "socq/social_embeddings.hpp"
#include "socq/social_profiler.hpp"
#include "socq/synthetic.hpp"
#include "socq/text.hpp"

using namespace socq;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const std::string& path) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!text::trim(line).empty()) lines.push_back(line);
  return lines;
}

std::set<std::string> csv_set(const std::string& s) {
  std::set<std::string> out;
  for (auto& part : text::split(s, ','))
    if (auto t = text::trim(part); !t.empty()) out.insert(text::to_lower(t));
  return out;
}

// Example/eval rows: {"id", "post_id", "subreddit"?, "source", "target", "group"}.
std::vector<eval::EvalItem> read_items(const std::string& path) {
  std::vector<eval::EvalItem> items;
  for (const auto& line : read_lines(path)) {
    auto j = json::parse(line);
    items.push_back({j.at("id").get<std::string>(), j.at("post_id").get<std::string>(),
                     j.value("subreddit", ""), j.at("source").get<std::string>(),
                     j.value("target", ""), parse_value(j.value("group", "UNK"))});
  }
  return items;
}

// ---------------------------------------------------------------------------

void add_ingest(CLI::App& app) {
  auto* cmd = app.add_subcommand("ingest", "Parse and filter submission and comment archives");
  static std::string posts, comments, bots, out;
  static int min_words = 25;
  cmd->add_option("--posts", posts, "Submission archive (.jsonl or .gz)")->required();
  cmd->add_option("--comments", comments, "Comment archive (.jsonl or .gz)")->required();
  cmd->add_option("--bots", bots, "Bot author list");
  cmd->add_option("--min-words", min_words);
  cmd->add_option("--out", out)->required();
  cmd->callback([] {
    const auto bot_set = bots.empty() ? std::set<std::string>{} : ingest::load_bot_list(bots);
    AsciiRatioDetector english;
    auto raw_posts = ingest::parse_archive_file(posts, ingest::ArchiveSchema::submissions(), RawRecord::Kind::Submission);
    auto pf = ingest::filter_posts(raw_posts.records, bot_set, english, min_words);
    std::set<std::string> kept;
    fs::create_directories(out);
    auto po = open_out((fs::path(out) / "posts.jsonl").string());
    for (const auto& p : pf.posts) {
      kept.insert(p.id);
      po << ingest::to_json_line(p) << "\n";
    }
    auto raw_comments = ingest::parse_archive_file(comments, ingest::ArchiveSchema::comments(), RawRecord::Kind::Comment);
    auto cf = ingest::filter_comments(raw_comments.records, bot_set, kept);
    auto co = open_out((fs::path(out) / "comments.jsonl").string());
    for (const auto& c : cf.comments) co << ingest::to_json_line(c) << "\n";
    std::cerr << "posts kept " << pf.posts.size() << " of " << pf.submissions_seen << " (length "
              << pf.rejected.length << ", language " << pf.rejected.language << ", bot " << pf.rejected.bot
              << ", malformed " << raw_posts.malformed << ")\n"
              << "comments kept " << cf.comments.size() << " (bot " << cf.bot << ", orphan " << cf.orphan
              << ", malformed " << raw_comments.malformed << ")\n";
  });
}

void add_questions(CLI::App& app) {
  auto* cmd = app.add_subcommand("questions", "Question extraction and info-seeking filter");
  cmd->require_subcommand(1);

  auto* extract = cmd->add_subcommand("extract", "Question sentences from comments");
  static std::string comments, out;
  extract->add_option("--comments", comments)->required();
  extract->add_option("--out", out)->required();
  extract->callback([] {
    auto o = open_out(out);
    std::size_t n = 0;
    for (const auto& c : ingest::read_comments(comments))
      for (const auto& q : questions::extract_candidates(c)) {
        o << questions::to_json_line(q) << "\n";
        ++n;
      }
    std::cerr << n << " candidate questions\n";
  });

  auto* train = cmd->add_subcommand("train-filter", "Cross-validate and train the info-seeking classifier");
  static std::string annotations, model_out;
  static int folds = 10;
  train->add_option("--annotations", annotations)->required();
  train->add_option("--folds", folds);
  train->add_option("--out", model_out)->required();
  train->callback([] {
    const auto rows = questions::read_annotations(annotations);
    const auto cv = questions::cross_validate(rows, questions::default_stopwords(), folds);
    for (std::size_t i = 0; i < cv.fold_f1.size(); ++i) std::cout << "fold\t" << i << "\t" << cv.fold_f1[i] << "\n";
    std::cout << "mean_f1\t" << cv.mean_f1 << "\n";
    open_out(model_out) << questions::InfoSeekClassifier::train(rows, questions::default_stopwords()).serialize();
  });

  auto* filter = cmd->add_subcommand("filter", "Keep info-seeking questions");
  static std::string model, in, filtered;
  static double threshold = 0.5;
  filter->add_option("--model", model)->required();
  filter->add_option("--questions", in)->required();
  filter->add_option("--threshold", threshold);
  filter->add_option("--out", filtered)->required();
  filter->callback([] {
    std::ifstream mf(model);
    if (!mf) throw std::runtime_error("cannot open " + model);
    std::stringstream ss;
    ss << mf.rdbuf();
    auto clf = questions::InfoSeekClassifier::deserialize(ss.str());
    auto kept = questions::score_and_filter(questions::read_questions(in), clf, threshold);
    auto o = open_out(filtered);
    for (const auto& q : kept) o << questions::to_json_line(q) << "\n";
    std::cerr << kept.size() << " questions kept\n";
  });
}

void add_profile(CLI::App& app) {
  auto* cmd = app.add_subcommand("profile", "Asker thresholds and group labels");
  cmd->require_subcommand(1);
  static std::string profiles, target, related, out, thresholds, gazetteer, subgeo;
  static int min_comments = 5;

  auto* th = cmd->add_subcommand("thresholds", "Population thresholds for one target subreddit");
  th->add_option("--profiles", profiles)->required();
  th->add_option("--target", target)->required();
  th->add_option("--related", related, "Comma-separated related subreddits");
  th->add_option("--out", out)->required();
  th->callback([] {
    auto pop = profile::read_profiles(profiles);
    auto t = profile::compute_thresholds(pop, target, csv_set(related), target);
    profile::write_thresholds(out, {t});
    std::cerr << "expertise_p75 " << t.expertise_p75 << ", time_p50 " << t.time_p50 << "\n";
  });

  auto* label = cmd->add_subcommand("label", "Label profiles against fixed thresholds");
  label->add_option("--profiles", profiles)->required();
  label->add_option("--thresholds", thresholds)->required();
  label->add_option("--gazetteer", gazetteer)->required();
  label->add_option("--subreddit-geo", subgeo, "subreddit -> place map");
  label->add_option("--target", target)->required();
  label->add_option("--related", related);
  label->add_option("--min-comments", min_comments);
  label->add_option("--out", out)->required();
  label->callback([] {
    auto sets = profile::read_thresholds(thresholds);
    auto it = std::find_if(sets.begin(), sets.end(), [](const auto& s) { return s.population_id == target; });
    if (it == sets.end()) throw std::runtime_error("no thresholds for population " + target);
    MapGazetteer gaz{load_key_values(gazetteer)};
    GazetteerEntityRecognizer ner{gaz};
    const auto geo = subgeo.empty() ? std::map<std::string, std::string>{} : load_key_values(subgeo);
    auto pop = profile::read_profiles(profiles);
    profile::label_profiles(pop, *it, target, csv_set(related), {ner, gaz, geo}, min_comments);
    auto o = open_out(out);
    for (const auto& p : pop) o << profile::to_json_line(p) << "\n";
  });
}

void add_embed(CLI::App& app) {
  auto* cmd = app.add_subcommand("embed", "Subreddit and asker embeddings");
  cmd->require_subcommand(1);
  static std::string profiles, out, table;
  static int dim = embed::kEmbeddingDim;
  static bool use_text = false;

  auto* subs = cmd->add_subcommand("subreddits", "NPMI + truncated SVD subreddit vectors");
  subs->add_option("--profiles", profiles)->required();
  subs->add_option("--dim", dim);
  subs->add_option("--out", out)->required();
  subs->callback([] {
    auto m = embed::build_crosspost_matrix(profile::read_profiles(profiles));
    auto e = embed::svd_embed(m.values, m.subreddits, dim);
    for (const auto& w : e.warnings) std::cerr << "warning: " << w << "\n";
    embed::write_embeddings(out, e.vectors);
  });

  auto* askers = cmd->add_subcommand("askers", "Asker vectors from subreddits or comment text");
  askers->add_option("--profiles", profiles)->required();
  auto* by_sub = askers->add_option("--subreddit", table, "Subreddit embeddings file");
  auto* by_text = askers->add_flag("--text", use_text, "Paragraph vectors over comment text");
  by_sub->excludes(by_text);
  askers->add_option("--out", out)->required();
  askers->callback([] {
    auto pop = profile::read_profiles(profiles);
    std::map<std::string, std::vector<double>> result;
    if (use_text) {
      std::vector<std::vector<std::string>> docs;
      for (const auto& p : pop)
        for (const auto& h : p.history) docs.push_back(text::words(h.body));
      auto pv = embed::ParagraphVectorModel::train(docs);
      for (const auto& p : pop)
        if (auto v = embed::asker_text_embedding(p, pv)) result[p.asker_id] = *v;
    } else {
      if (table.empty()) throw CLI::ValidationError("askers", "one of --subreddit or --text is required");
      const auto t = embed::read_embeddings(table);
      for (const auto& p : pop)
        if (auto v = embed::asker_subreddit_embedding(p, t)) result[p.asker_id] = *v;
    }
    embed::write_embeddings(out, result);
    std::cerr << result.size() << " of " << pop.size() << " askers embedded\n";
  });
}

void add_model(CLI::App& app) {
  auto* cmd = app.add_subcommand("model", "Train and query question generators");
  cmd->require_subcommand(1);
  static std::string config, examples, out, variant, category, checkpoint, post, group = "UNK";
  static int epochs = 0;

  auto* train = cmd->add_subcommand("train", "Train one variant; writes a checkpoint and the test split");
  train->add_option("--config", config, "ModelConfig JSON");
  train->add_option("--examples", examples)->required();
  train->add_option("--variant", variant);
  train->add_option("--category", category);
  train->add_option("--epochs", epochs);
  train->add_option("--out", out)->required();
  train->callback([] {
    auto c = config.empty() ? seq2seq::ModelConfig{} : seq2seq::ModelConfig::load(config);
    if (!variant.empty()) c.variant = seq2seq::parse_variant(variant);
    if (!category.empty()) c.category = parse_category(category);
    if (epochs > 0) c.epochs = epochs;
    auto split = seq2seq::split_by_post(seq2seq::read_examples(examples), 0.8, 0.1, c.seed);
    auto r = seq2seq::train(c, split.train, split.validation);
    r.model->save(out);
    seq2seq::write_examples((fs::path(out) / "test.jsonl").string(), split.test);
    for (std::size_t e = 0; e < r.report.val_loss.size(); ++e)
      std::cout << "epoch\t" << e << "\t" << (e ? r.report.train_loss[e - 1] : 0.0) << "\t" << r.report.val_loss[e] << "\n";
    std::cout << "best_epoch\t" << r.report.best_epoch << "\nversion\t" << r.model->version() << "\n";
  });

  auto* gen = cmd->add_subcommand("generate", "Generate questions for a post or an examples file");
  gen->add_option("--checkpoint", checkpoint)->required();
  gen->add_option("--post", post);
  gen->add_option("--group", group);
  gen->add_option("--examples", examples, "One hypothesis per line is printed, aligned with the file");
  gen->callback([] {
    const auto m = seq2seq::Model::load(checkpoint);
    if (!examples.empty()) {
      for (const auto& ex : seq2seq::read_examples(examples)) std::cout << m.generate(ex) << "\n";
      return;
    }
    seq2seq::ConditionedExample ex;
    ex.source = post;
    ex.group = parse_value(group);
    std::cout << m.generate(ex) << "\n";
  });

  auto* attn = cmd->add_subcommand("attention-ratio", "Per-token attention under the two labelled values");
  attn->add_option("--checkpoint", checkpoint)->required();
  attn->add_option("--post", post)->required();
  attn->callback([] {
    const auto m = seq2seq::Model::load(checkpoint);
    std::cout << "token\tscore_a\tscore_b\tratio\n";
    for (const auto& s : m.attention_ratio(post))
      std::cout << s.token << "\t" << s.score_a << "\t" << s.score_b << "\t" << s.ratio << "\n";
  });
}

void add_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "Automatic evaluation");
  cmd->require_subcommand(1);
  auto* run = cmd->add_subcommand("run", "Metrics per model and subset");
  static std::string items_path, subsets = "full", train_path, json_out, group_specific;
  static std::vector<std::string> outputs;
  run->add_option("--items", items_path, "Examples JSONL with references")->required();
  run->add_option("--output", outputs, "name=path, one hypothesis per line")->required();
  run->add_option("--subsets", subsets);
  run->add_option("--train-questions", train_path, "Training examples JSONL for redundancy");
  run->add_option("--group-specific", group_specific, "Item ids, one per line");
  run->add_option("--json", json_out);
  run->callback([] {
    const auto items = read_items(items_path);
    std::vector<eval::ModelOutputs> models;
    for (const auto& spec : outputs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--output", "expected name=path");
      eval::ModelOutputs m;
      m.name = spec.substr(0, eq);
      std::ifstream in(spec.substr(eq + 1));
      if (!in) throw std::runtime_error("cannot open " + spec.substr(eq + 1));
      for (std::string line; std::getline(in, line);) m.hypotheses.push_back(line);
      models.push_back(std::move(m));
    }
    HashingSentenceEncoder encoder(256);
    HeuristicDependencyParser parser;
    eval::EvalContext ctx;
    ctx.encoder = &encoder;
    ctx.parser = &parser;
    if (!train_path.empty())
      for (const auto& it : read_items(train_path)) ctx.training_questions.push_back(it.reference);
    if (!group_specific.empty())
      for (const auto& id : read_lines(group_specific)) ctx.group_specific_ids.insert(text::trim(id));
    std::vector<std::string> names;
    for (auto& s : text::split(subsets, ','))
      if (!text::trim(s).empty()) names.push_back(text::trim(s));
    const auto rows = eval::evaluate_run(items, models, names, ctx);
    std::cout << eval::to_tsv(rows);
    if (!json_out.empty()) open_out(json_out) << eval::to_json(rows) << "\n";
  });
}

void add_humaneval(CLI::App& app) {
  auto* cmd = app.add_subcommand("humaneval", "Human evaluation packets and summaries");
  cmd->require_subcommand(1);
  static std::string items, subreddit, category = "EXPERTISE", text_ckpt, social_ckpt, out, key;
  static std::vector<std::string> ratings;
  static std::size_t n = 50;
  static double percentile = 10;
  static std::uint64_t seed = 1;

  auto* pack = cmd->add_subcommand("pack", "Sample divisive posts and export annotator files");
  pack->add_option("--items", items)->required();
  pack->add_option("--subreddit", subreddit)->required();
  pack->add_option("--category", category);
  pack->add_option("--n", n);
  pack->add_option("--percentile", percentile);
  pack->add_option("--text-only", text_ckpt)->required();
  pack->add_option("--social", social_ckpt)->required();
  pack->add_option("--seed", seed);
  pack->add_option("--out", out)->required();
  pack->callback([] {
    HashingSentenceEncoder encoder(256);
    const auto cat = parse_category(category);
    auto posts = humaneval::sample_divisive_posts(read_items(items), subreddit, cat, n, percentile, encoder, seed);
    const auto text_model = seq2seq::Model::load(text_ckpt);
    const auto social_model = seq2seq::Model::load(social_ckpt);
    auto gen = [](const seq2seq::Model& m) {
      return [&m](const std::string& p, GroupValue g) {
        seq2seq::ConditionedExample ex;
        ex.source = p;
        ex.group = g;
        return m.generate(ex);
      };
    };
    std::vector<std::string> warnings;
    auto packets = humaneval::build_packets(posts, gen(text_model), gen(social_model), seed, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    auto files = humaneval::export_annotator_files(packets, out);
    humaneval::write_key((fs::path(out) / "key.tsv").string(), humaneval::answer_key(packets));
    std::cerr << packets.size() << " packets in " << files.size() << " files\n";
  });

  auto* summ = cmd->add_subcommand("summarize", "Means, signed-rank tests and guess accuracy");
  summ->add_option("--ratings", ratings)->required();
  summ->add_option("--key", key)->required();
  summ->callback([] {
    std::vector<humaneval::Rating> all;
    for (const auto& f : ratings) {
      auto r = humaneval::read_ratings(f);
      all.insert(all.end(), r.begin(), r.end());
    }
    std::cout << humaneval::summarize(all, humaneval::read_key(key)).to_tsv();
  });
}

void add_groups(CLI::App& app) {
  auto* cmd = app.add_subcommand("groups", "Group-level question analysis");
  cmd->require_subcommand(1);
  auto* diff = cmd->add_subcommand("diff", "Lexicon category differences between two question sets");
  static std::string lexicon, a, b, a_name = "A", b_name = "B";
  static std::size_t top = 10;
  diff->add_option("--lexicon", lexicon)->required();
  diff->add_option("--a", a, "Questions, one per line")->required();
  diff->add_option("--b", b)->required();
  diff->add_option("--a-name", a_name);
  diff->add_option("--b-name", b_name);
  diff->add_option("--top", top);
  diff->callback([] {
    const auto lex = groups::CategoryLexicon::load(lexicon);
    std::cout << groups::group_diff_report(a_name, read_lines(a), b_name, read_lines(b), lex).to_tsv(top);
  });
}

void add_serve(CLI::App& app) {
  auto* cmd = app.add_subcommand("serve", "HTTP preview service");
  static std::string checkpoint, host = "127.0.0.1";
  static int port = 8080;
  if (const char* env = std::getenv("SOCQ_CHECKPOINT")) checkpoint = env;
  if (const char* env = std::getenv("SOCQ_PORT")) port = std::atoi(env);
  cmd->add_option("--checkpoint", checkpoint);
  cmd->add_option("--port", port);
  cmd->add_option("--host", host);
  cmd->callback([] { std::exit(service::serve(checkpoint, host, port)); });
}

void add_synth(CLI::App& app) {
  auto* cmd = app.add_subcommand("synth", "Seeded synthetic data for demos");
  static std::size_t posts = 250;
  static std::string category = "EXPERTISE", out;
  static std::uint64_t seed = 7;
  cmd->add_option("--posts", posts);
  cmd->add_option("--category", category);
  cmd->add_option("--seed", seed);
  cmd->add_option("--out", out)->required();
  cmd->callback([] {
    auto o = open_out(out);
    for (const auto& t : synthetic::question_corpus(posts, parse_category(category), seed))
      o << json{{"id", t.id}, {"post_id", t.post_id}, {"subreddit", t.subreddit}, {"source", t.post},
                {"target", t.question}, {"group", std::string(to_string(t.group))}}
               .dump()
        << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Socially conditioned clarification-question toolkit"};
  app.require_subcommand(1);
  add_ingest(app);
  add_questions(app);
  add_profile(app);
  add_embed(app);
  add_model(app);
  add_eval(app);
  add_humaneval(app);
  add_groups(app);
  add_serve(app);
  add_synth(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
