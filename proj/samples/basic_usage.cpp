// Loads a labeled CSV, finds the independent medoid features and ranks them
// by class-compensated relevance.
//
//   rankmed_basic_usage samples/planted.csv label

#include <iostream>

#include "rankmed/rankmed.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: " << argv[0] << " <csv> [label-column]\n";
    return 2;
  }
  const auto data = rankmed::load_csv(argv[1], {argc > 2 ? argv[2] : "label"});
  const auto& f = data.features;

  const auto spectrum = rankmed::eigen_spectrum(f);
  const auto partition = rankmed::find_medoids(f);
  std::cout << "effective rank " << spectrum.effective_rank << ", k = " << partition.k() << '\n';
  for (std::size_t c = 0; c < partition.k(); ++c) {
    std::cout << "  cluster " << c + 1 << " (medoid " << f.name(partition.medoids[c]) << "):";
    for (auto j : partition.clusters[c]) std::cout << ' ' << f.name(j);
    std::cout << '\n';
  }

  const auto medoids = rankmed::select_features(partition);
  const auto run = rankmed::run_relevance(f, data.labels, medoids, true);
  std::cout << "relevance of the medoids:\n";
  for (const auto& r : rankmed::rank_features(run.scores.total))
    std::cout << "  " << f.name(medoids[r.index]) << '\t' << r.score << '\n';
}
