#pragma once

#include <string>
#include <vector>

namespace poisonrank {

struct MovieLensResult {
  std::vector<double> means;       // fraction of ratings >= threshold
  std::vector<long> movie_ids;     // original movie ids, most rated first
  std::vector<long> rating_counts;
};

// Reads a ratings CSV with header `userId,movieId,rating,timestamp`, keeps
// the num_items movies with the most ratings (ties to the smaller movie id),
// and estimates each one's attraction probability as the fraction of its
// ratings at or above `threshold`. Malformed rows raise IoError with the line
// number; fewer distinct movies than requested raises ConfigError.
MovieLensResult ingest_movielens(const std::string& csv_path, int num_items,
                                 double threshold);

}  // namespace poisonrank
