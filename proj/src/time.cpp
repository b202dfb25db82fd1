#include "hivead/time.hpp"

#include <charconv>
#include <cstdio>

namespace hivead {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc{} && ptr == first + len;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<ParsedTime> parse_epoch(std::string_view text) {
  std::size_t dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), value);
  if (ec != std::errc{} || ptr != whole.data() + whole.size()) return std::nullopt;
  if (dot != std::string_view::npos) {
    for (char c : text.substr(dot + 1))
      if (c < '0' || c > '9') return std::nullopt;
  }
  return ParsedTime{Timestamp{seconds{value}}, seconds{0}, false};
}

}  // namespace

std::optional<ParsedTime> parse_time(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.size() < 19 || text[4] != '-') return parse_epoch(text);

  int y, mo, d, h, mi, s;
  if (!read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, mo) ||
      text[7] != '-' || !read_int(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
      !read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi) ||
      text[16] != ':' || !read_int(text, 17, 2, s))
    return std::nullopt;

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }

  ParsedTime out;
  std::string_view rest = text.substr(pos);
  if (rest == "Z" || rest == "z") {
    out.has_offset = true;
  } else if (!rest.empty()) {
    if (rest[0] != '+' && rest[0] != '-') return std::nullopt;
    int oh = 0, om = 0;
    if (rest.size() == 6 && rest[3] == ':') {
      if (!read_int(rest, 1, 2, oh) || !read_int(rest, 4, 2, om)) return std::nullopt;
    } else if (rest.size() == 5) {
      if (!read_int(rest, 1, 2, oh) || !read_int(rest, 3, 2, om)) return std::nullopt;
    } else if (rest.size() == 3) {
      if (!read_int(rest, 1, 2, oh)) return std::nullopt;
    } else {
      return std::nullopt;
    }
    const int sign = rest[0] == '-' ? -1 : 1;
    out.offset = seconds{sign * (oh * 3600 + om * 60)};
    out.has_offset = true;
  }

  const auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  out.utc = time_point_cast<seconds>(local) - out.offset;
  return out;
}

std::string format_time(Timestamp ts, seconds offset) {
  using namespace std::chrono;
  const auto local = ts + offset;
  const auto dp = floor<days>(local);
  const year_month_day ymd{dp};
  const hh_mm_ss hms{local - dp};

  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                        static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                        static_cast<int>(hms.seconds().count()));
  std::string out(buf, static_cast<std::size_t>(n));
  if (offset == seconds{0}) {
    out += 'Z';
  } else {
    const long long total = offset.count();
    const long long mag = total < 0 ? -total : total;
    std::snprintf(buf, sizeof buf, "%c%02lld:%02lld", total < 0 ? '-' : '+', mag / 3600, (mag % 3600) / 60);
    out += buf;
  }
  return out;
}

Day local_day(Timestamp ts, seconds offset) {
  return std::chrono::floor<std::chrono::days>(ts + offset);
}

Timestamp day_start(Day day, seconds offset) {
  return Timestamp{day} - offset;
}

std::string format_day(Day day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<Day> parse_day(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  int y, mo, d;
  if (text.size() != 10 || !read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, mo) ||
      text[7] != '-' || !read_int(text, 8, 2, d))
    return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

}  // namespace hivead
