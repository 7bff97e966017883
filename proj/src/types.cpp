#include "socq/types.hpp"

#include <algorithm>

namespace socq {

std::string_view to_string(GroupCategory c) {
  switch (c) {
    case GroupCategory::Expertise: return "EXPERTISE";
    case GroupCategory::Time: return "TIME";
    case GroupCategory::Location: return "LOCATION";
  }
  return "?";
}

std::string_view to_string(GroupValue v) {
  switch (v) {
    case GroupValue::Expert: return "Expert";
    case GroupValue::Novice: return "Novice";
    case GroupValue::Fast: return "Fast";
    case GroupValue::Slow: return "Slow";
    case GroupValue::US: return "US";
    case GroupValue::NonUS: return "NonUS";
    case GroupValue::UNK: return "UNK";
  }
  return "?";
}

GroupCategory parse_category(std::string_view s) {
  for (auto c : all_categories())
    if (to_string(c) == s) return c;
  throw InvalidGroup("unknown group category: " + std::string(s));
}

GroupValue parse_value(std::string_view s) {
  static const GroupValue kAll[] = {GroupValue::Expert, GroupValue::Novice, GroupValue::Fast,
                                    GroupValue::Slow,   GroupValue::US,     GroupValue::NonUS,
                                    GroupValue::UNK};
  for (auto v : kAll)
    if (to_string(v) == s) return v;
  throw InvalidGroup("unknown group value: " + std::string(s));
}

const std::vector<GroupValue>& values_of(GroupCategory c) {
  static const std::vector<GroupValue> expertise{GroupValue::Expert, GroupValue::Novice,
                                                 GroupValue::UNK};
  static const std::vector<GroupValue> time{GroupValue::Fast, GroupValue::Slow, GroupValue::UNK};
  static const std::vector<GroupValue> location{GroupValue::US, GroupValue::NonUS,
                                                GroupValue::UNK};
  switch (c) {
    case GroupCategory::Expertise: return expertise;
    case GroupCategory::Time: return time;
    case GroupCategory::Location: return location;
  }
  return expertise;
}

const std::vector<GroupCategory>& all_categories() {
  static const std::vector<GroupCategory> all{GroupCategory::Expertise, GroupCategory::Time,
                                              GroupCategory::Location};
  return all;
}

bool is_legal(GroupCategory c, GroupValue v) {
  const auto& vs = values_of(c);
  return std::find(vs.begin(), vs.end(), v) != vs.end();
}

GroupLabel make_label(GroupCategory c, GroupValue v) {
  if (!is_legal(c, v))
    throw InvalidGroup(std::string(to_string(v)) + " is not a value of " +
                       std::string(to_string(c)));
  return GroupLabel{c, v};
}

}  // namespace socq
