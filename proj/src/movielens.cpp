#include "poisonrank/movielens.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "poisonrank/errors.hpp"

namespace poisonrank {

namespace {

struct MovieAccum {
  long count = 0;
  long positive = 0;
};

[[noreturn]] void bad_row(const std::string& path, long line,
                          const std::string& what) {
  throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

// Splits a CSV row into exactly four fields; no quoting is used in ratings
// exports.
bool split4(const std::string& row, std::string_view out[4]) {
  std::size_t start = 0;
  for (int f = 0; f < 4; ++f) {
    const std::size_t comma = row.find(',', start);
    if (f < 3) {
      if (comma == std::string::npos) return false;
      out[f] = std::string_view(row).substr(start, comma - start);
      start = comma + 1;
    } else {
      if (comma != std::string::npos) return false;
      out[f] = std::string_view(row).substr(start);
    }
  }
  return true;
}

bool parse_long(std::string_view s, long& v) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end;
}

bool parse_double(std::string_view s, double& v) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end;
}

}  // namespace

MovieLensResult ingest_movielens(const std::string& csv_path, int num_items,
                                 double threshold) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open ratings file '" + csv_path + "'");

  std::string row;
  long line = 0;
  if (!std::getline(in, row)) bad_row(csv_path, 1, "empty file");
  ++line;
  if (!row.empty() && row.back() == '\r') row.pop_back();
  if (row != "userId,movieId,rating,timestamp")
    bad_row(csv_path, line, "expected header userId,movieId,rating,timestamp");

  std::unordered_map<long, MovieAccum> movies;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    std::string_view f[4];
    if (!split4(row, f)) bad_row(csv_path, line, "expected 4 fields");
    long user, movie, ts;
    double rating;
    if (!parse_long(f[0], user)) bad_row(csv_path, line, "bad userId");
    if (!parse_long(f[1], movie)) bad_row(csv_path, line, "bad movieId");
    if (!parse_double(f[2], rating) || rating < 0.0 || rating > 5.0)
      bad_row(csv_path, line, "bad rating");
    if (!parse_long(f[3], ts)) bad_row(csv_path, line, "bad timestamp");
    (void)user;
    (void)ts;
    MovieAccum& acc = movies[movie];
    ++acc.count;
    acc.positive += rating >= threshold ? 1 : 0;
  }

  if (static_cast<int>(movies.size()) < num_items)
    throw ConfigError("ratings file has " + std::to_string(movies.size()) +
                      " distinct movies, need " + std::to_string(num_items));

  std::vector<std::pair<long, MovieAccum>> ranked(movies.begin(),
                                                  movies.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.second.count != y.second.count) return x.second.count > y.second.count;
    return x.first < y.first;
  });

  MovieLensResult out;
  out.means.reserve(num_items);
  out.movie_ids.reserve(num_items);
  out.rating_counts.reserve(num_items);
  for (int i = 0; i < num_items; ++i) {
    const auto& [id, acc] = ranked[i];
    out.movie_ids.push_back(id);
    out.rating_counts.push_back(acc.count);
    out.means.push_back(static_cast<double>(acc.positive) /
                        static_cast<double>(acc.count));
  }
  return out;
}

}  // namespace poisonrank
