#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace socq {

enum class GroupCategory { Expertise, Time, Location };

enum class GroupValue { Expert, Novice, Fast, Slow, US, NonUS, UNK };

struct GroupLabel {
  GroupCategory category = GroupCategory::Expertise;
  GroupValue value = GroupValue::UNK;

  bool operator==(const GroupLabel&) const = default;
};

class InvalidGroup : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string_view to_string(GroupCategory c);
std::string_view to_string(GroupValue v);
GroupCategory parse_category(std::string_view s);  // throws InvalidGroup
GroupValue parse_value(std::string_view s);        // throws InvalidGroup

// Two labelled values followed by UNK, in catalog order.
const std::vector<GroupValue>& values_of(GroupCategory c);
const std::vector<GroupCategory>& all_categories();
bool is_legal(GroupCategory c, GroupValue v);

// Checked constructor for GroupLabel.
GroupLabel make_label(GroupCategory c, GroupValue v);

// Raw archive record, before any filtering.
struct RawRecord {
  enum class Kind { Submission, Comment };
  Kind kind = Kind::Submission;
  std::string id;
  std::optional<std::string> parent_id;
  std::optional<std::string> link_id;
  std::string subreddit;
  std::string author;
  std::string title;
  std::string body;
  std::int64_t created_utc = 0;
};

struct Post {
  std::string id;
  std::string subreddit;
  std::string author;
  std::string title;
  std::string body;
  std::int64_t created_utc = 0;
  int word_count = 0;
};

struct Comment {
  std::string id;
  std::string post_id;
  std::string author;
  std::string body;
  std::int64_t created_utc = 0;
};

struct Question {
  std::string id;
  std::string post_id;
  std::string asker_id;
  std::string text;
  std::int64_t created_utc = 0;
  double infoseek_prob = 0.0;
};

}  // namespace socq
