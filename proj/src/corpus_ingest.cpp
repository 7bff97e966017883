#include "socq/corpus_ingest.hpp"

#include <zlib.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "socq/text.hpp"

namespace socq::ingest {

using nlohmann::json;

namespace {

std::optional<std::string> get_string(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<std::int64_t> get_time(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) return static_cast<std::int64_t>(it->get<double>());
  if (it->is_string()) {
    try {
      std::size_t pos = 0;
      auto v = std::stoll(it->get<std::string>(), &pos);
      if (pos == it->get<std::string>().size()) return v;
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

std::optional<RawRecord> decode(const std::string& line, const ArchiveSchema& schema,
                                RawRecord::Kind kind) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  RawRecord r;
  r.kind = kind;
  auto id = get_string(j, schema.id);
  auto created = get_time(j, schema.created_utc);
  if (!id || id->empty() || !created || *created <= 0) return std::nullopt;
  r.id = *id;
  r.created_utc = *created;
  r.subreddit = get_string(j, schema.subreddit).value_or("");
  r.author = get_string(j, schema.author).value_or("");
  r.body = get_string(j, schema.body).value_or("");
  r.title = get_string(j, schema.title).value_or("");
  r.parent_id = get_string(j, schema.parent_id);
  r.link_id = get_string(j, schema.link_id);
  if (kind == RawRecord::Kind::Comment && !r.parent_id) return std::nullopt;
  return r;
}

std::string strip_kind_prefix(const std::string& id) {
  // t3_abc -> abc
  if (id.size() > 3 && id[0] == 't' && id[2] == '_') return id.substr(3);
  return id;
}

}  // namespace

ParseResult parse_archive(std::istream& in, const ArchiveSchema& schema, RawRecord::Kind kind) {
  ParseResult out;
  std::string line;
  std::uint64_t offset = 0;
  while (true) {
    if (!std::getline(in, line)) {
      if (in.bad()) throw IoError("unreadable archive stream", offset);
      break;
    }
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (auto r = decode(line, schema, kind))
      out.records.push_back(std::move(*r));
    else
      ++out.malformed;
  }
  return out;
}

ParseResult parse_archive_file(const std::string& path, const ArchiveSchema& schema,
                               RawRecord::Kind kind) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open " + path, 0);
  std::string data;
  char buf[1 << 16];
  std::uint64_t offset = 0;
  while (true) {
    int n = gzread(f, buf, sizeof buf);
    if (n < 0) {
      int err = 0;
      std::string msg = gzerror(f, &err);
      gzclose(f);
      throw IoError("read error in " + path + ": " + msg, offset);
    }
    if (n == 0) break;
    data.append(buf, static_cast<std::size_t>(n));
    offset += static_cast<std::uint64_t>(n);
  }
  gzclose(f);
  std::istringstream in(data);
  return parse_archive(in, schema, kind);
}

int word_count(const std::string& title, const std::string& body) {
  return static_cast<int>(text::split_whitespace(title).size() +
                          text::split_whitespace(body).size());
}

PostFilterResult filter_posts(const std::vector<RawRecord>& records,
                              const std::set<std::string>& bots, const LanguageDetector& detector,
                              int min_words) {
  PostFilterResult out;
  for (const auto& r : records) {
    if (r.kind != RawRecord::Kind::Submission) continue;
    ++out.submissions_seen;
    if (bots.contains(r.author)) {
      ++out.rejected.bot;
      continue;
    }
    const int wc = word_count(r.title, r.body);
    if (wc < min_words) {
      ++out.rejected.length;
      continue;
    }
    if (!detector.is_english(r.title + " " + r.body)) {
      ++out.rejected.language;
      continue;
    }
    out.posts.push_back(Post{r.id, r.subreddit, r.author, r.title, r.body, r.created_utc, wc});
  }
  return out;
}

CommentFilterResult filter_comments(const std::vector<RawRecord>& records,
                                    const std::set<std::string>& bots,
                                    const std::set<std::string>& retained_post_ids) {
  CommentFilterResult out;
  for (const auto& r : records) {
    if (r.kind != RawRecord::Kind::Comment) continue;
    if (bots.contains(r.author)) {
      ++out.bot;
      continue;
    }
    std::string post_id = strip_kind_prefix(r.link_id ? *r.link_id : r.parent_id.value_or(""));
    if (!retained_post_ids.contains(post_id)) {
      ++out.orphan;
      continue;
    }
    out.comments.push_back(Comment{r.id, post_id, r.author, r.body, r.created_utc});
  }
  return out;
}

RawRecord to_record(const Post& p) {
  RawRecord r;
  r.kind = RawRecord::Kind::Submission;
  r.id = p.id;
  r.subreddit = p.subreddit;
  r.author = p.author;
  r.title = p.title;
  r.body = p.body;
  r.created_utc = p.created_utc;
  return r;
}

std::string to_json_line(const Post& p) {
  json j{{"id", p.id},       {"subreddit", p.subreddit},     {"author", p.author},
         {"title", p.title}, {"body", p.body},               {"created_utc", p.created_utc},
         {"word_count", p.word_count}};
  return j.dump();
}

std::string to_json_line(const Comment& c) {
  json j{{"id", c.id},
         {"post_id", c.post_id},
         {"author", c.author},
         {"body", c.body},
         {"created_utc", c.created_utc}};
  return j.dump();
}

Post post_from_json(const std::string& line) {
  auto j = json::parse(line);
  return Post{j.at("id"),   j.at("subreddit"),   j.at("author"),    j.value("title", ""),
              j.at("body"), j.at("created_utc"), j.value("word_count", 0)};
}

Comment comment_from_json(const std::string& line) {
  auto j = json::parse(line);
  return Comment{j.at("id"), j.at("post_id"), j.at("author"), j.at("body"), j.at("created_utc")};
}

namespace {
template <typename T, typename F>
std::vector<T> read_lines_as(const std::string& path, F decode_line) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path, 0);
  std::vector<T> out;
  std::string line;
  while (std::getline(in, line))
    if (!text::trim(line).empty()) out.push_back(decode_line(line));
  return out;
}
}  // namespace

std::vector<Post> read_posts(const std::string& path) {
  return read_lines_as<Post>(path, post_from_json);
}

std::vector<Comment> read_comments(const std::string& path) {
  return read_lines_as<Comment>(path, comment_from_json);
}

std::set<std::string> load_bot_list(const std::string& path) {
  auto lines = load_lines(path);
  return {lines.begin(), lines.end()};
}

}  // namespace socq::ingest
