#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "socq/ports.hpp"
#include "socq/types.hpp"

namespace socq::ingest {

// Maps logical record fields onto the keys used by a particular dump.
struct ArchiveSchema {
  std::string id = "id";
  std::string parent_id = "parent_id";
  std::string link_id = "link_id";
  std::string subreddit = "subreddit";
  std::string author = "author";
  std::string title = "title";
  std::string body = "selftext";  // submissions; comment dumps use "body"
  std::string created_utc = "created_utc";

  static ArchiveSchema submissions() { return {}; }
  static ArchiveSchema comments() {
    ArchiveSchema s;
    s.body = "body";
    return s;
  }
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::uint64_t byte_offset)
      : std::runtime_error(what + " at byte " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::uint64_t byte_offset() const { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::size_t malformed = 0;
};

// Newline-delimited JSON records. Malformed lines are counted and skipped;
// a stream read failure throws IoError carrying the byte offset.
ParseResult parse_archive(std::istream& in, const ArchiveSchema& schema, RawRecord::Kind kind);

// Reads a plain or gzip-compressed file through zlib.
ParseResult parse_archive_file(const std::string& path, const ArchiveSchema& schema,
                               RawRecord::Kind kind);

// Whitespace-token count of title and body together.
int word_count(const std::string& title, const std::string& body);

struct RejectionTally {
  std::size_t length = 0;
  std::size_t language = 0;
  std::size_t bot = 0;
  std::size_t total() const { return length + language + bot; }
};

struct PostFilterResult {
  std::vector<Post> posts;
  RejectionTally rejected;
  std::size_t submissions_seen = 0;
};

// Bot check first, then length, then language; each rejection is tallied once.
PostFilterResult filter_posts(const std::vector<RawRecord>& records,
                              const std::set<std::string>& bots, const LanguageDetector& detector,
                              int min_words = 25);

struct CommentFilterResult {
  std::vector<Comment> comments;
  std::size_t bot = 0;
  std::size_t orphan = 0;  // comment whose post was not retained
};

CommentFilterResult filter_comments(const std::vector<RawRecord>& records,
                                    const std::set<std::string>& bots,
                                    const std::set<std::string>& retained_post_ids);

RawRecord to_record(const Post& post);

// Canonical one-record-per-line JSON encodings.
std::string to_json_line(const Post& p);
std::string to_json_line(const Comment& c);
Post post_from_json(const std::string& line);
Comment comment_from_json(const std::string& line);

std::vector<Post> read_posts(const std::string& path);
std::vector<Comment> read_comments(const std::string& path);

std::set<std::string> load_bot_list(const std::string& path);

}  // namespace socq::ingest
