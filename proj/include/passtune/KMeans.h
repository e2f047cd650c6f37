//===-- KMeans.h - Deterministic k-means and elbow selection ----*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// From-scratch Lloyd iteration with k-means++ seeding on the project's
// portable PRNG (see Rng.h), so fitted models are bit-reproducible from
// (points, k, seed) on any platform. The distance/assignment step is the
// data-parallel kernel: it runs under OpenMP with a serial reference kept
// for testing; centroid updates and reductions stay serial so summation
// order never changes.
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_KMEANS_H
#define PASSTUNE_KMEANS_H

#include "passtune/Core.h"

namespace passtune {

struct KMeansModel {
  std::vector<FeatureVector> centroids;
  int k = 0;
  std::uint64_t seed = 0;
  double inertia = 0.0; // final within-cluster sum of squared distances
  int schemaVersion = 0;
};

struct ClusterAssignment {
  std::vector<int> labels; // per input point, in input order
};

double squaredDistance(const FeatureVector& a, const FeatureVector& b);

/// Nearest-centroid assignment; ties break toward the smaller index.
/// `labels` and `dist2` are resized to the point count.
void assignPointsSerial(const std::vector<FeatureVector>& points,
                        const std::vector<FeatureVector>& centroids,
                        std::vector<int>& labels, std::vector<double>& dist2);
void assignPointsParallel(const std::vector<FeatureVector>& points,
                          const std::vector<FeatureVector>& centroids,
                          std::vector<int>& labels,
                          std::vector<double>& dist2);

/// k-means++ seeding, then Lloyd iterations until the relative centroid
/// shift drops below 1e-6 or 300 iterations; empty clusters are reseeded to
/// the point farthest from its assigned centroid.
std::pair<KMeansModel, ClusterAssignment>
kmeansFit(const std::vector<FeatureVector>& points, int k, std::uint64_t seed,
          int schemaVersion = 0);

/// Fits every k in [kMin, kMax] and returns the k whose (k, inertia) point
/// lies farthest from the chord between the endpoints; ties take the
/// smallest k.
int elbowSelectK(const std::vector<FeatureVector>& points, int kMin, int kMax,
                 std::uint64_t seed);

/// Index of the nearest centroid (ties toward the smaller index).
int classify(const KMeansModel& model, const FeatureVector& v);

} // namespace passtune

#endif // PASSTUNE_KMEANS_H
