//===-- KMeans.cpp - Deterministic k-means and elbow selection ------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/KMeans.h"

#include "passtune/Rng.h"

#include <cmath>
#include <limits>

namespace passtune {

double squaredDistance(const FeatureVector& a, const FeatureVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

namespace {

int nearestCentroid(const FeatureVector& p,
                    const std::vector<FeatureVector>& centroids,
                    double& bestD2) {
  int best = 0;
  bestD2 = squaredDistance(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    double d2 = squaredDistance(p, centroids[c]);
    if (d2 < bestD2) { // strict: ties keep the smaller index
      bestD2 = d2;
      best = static_cast<int>(c);
    }
  }
  return best;
}

void validatePoints(const std::vector<FeatureVector>& points) {
  if (points.empty())
    throw DataError("k-means: no points");
  std::size_t dim = points[0].size();
  for (const FeatureVector& p : points) {
    if (p.size() != dim)
      throw DataError("k-means: inconsistent feature dimensions");
    for (double x : p)
      if (!std::isfinite(x))
        throw DataError("k-means: non-finite feature component");
  }
}

std::vector<FeatureVector>
kmeansPlusPlusInit(const std::vector<FeatureVector>& points, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<FeatureVector> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.nextBelow(n)]);

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i)
    d2[i] = squaredDistance(points[i], centroids[0]);

  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : d2)
      total += d;
    std::size_t chosen;
    if (total <= 0.0) {
      // All points coincide with some centroid; any choice is equivalent.
      chosen = rng.nextBelow(n);
    } else {
      double r = rng.nextDouble() * total;
      double cum = 0.0;
      chosen = n; // sentinel
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0)
          continue;
        cum += d2[i];
        if (cum > r) {
          chosen = i;
          break;
        }
      }
      if (chosen == n) { // floating-point tail: take the last viable point
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            chosen = i;
            break;
          }
        if (chosen == n)
          chosen = rng.nextBelow(n);
      }
    }
    centroids.push_back(points[chosen]);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squaredDistance(points[i], centroids.back()));
  }
  return centroids;
}

} // namespace

void assignPointsSerial(const std::vector<FeatureVector>& points,
                        const std::vector<FeatureVector>& centroids,
                        std::vector<int>& labels, std::vector<double>& dist2) {
  labels.resize(points.size());
  dist2.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    labels[i] = nearestCentroid(points[i], centroids, dist2[i]);
}

void assignPointsParallel(const std::vector<FeatureVector>& points,
                          const std::vector<FeatureVector>& centroids,
                          std::vector<int>& labels,
                          std::vector<double>& dist2) {
  labels.resize(points.size());
  dist2.resize(points.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < points.size(); ++i)
    labels[i] = nearestCentroid(points[i], centroids, dist2[i]);
}

std::pair<KMeansModel, ClusterAssignment>
kmeansFit(const std::vector<FeatureVector>& points, int k, std::uint64_t seed,
          int schemaVersion) {
  validatePoints(points);
  if (k < 1)
    throw DataError("k-means: k must be >= 1");
  if (static_cast<std::size_t>(k) > points.size())
    throw DataError("k-means: k (" + std::to_string(k) +
                    ") exceeds point count (" +
                    std::to_string(points.size()) + ")");

  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  Rng rng(seed);
  std::vector<FeatureVector> centroids = kmeansPlusPlusInit(points, k, rng);

  std::vector<int> labels;
  std::vector<double> dist2;
  double prevInertia = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < 300; ++iter) {
    assignPointsParallel(points, centroids, labels, dist2);

    double inertia = 0.0;
    for (double d : dist2)
      inertia += d;
    // Lloyd iterations cannot increase the objective; allow FP slack only.
    if (inertia > prevInertia + 1e-9 * std::max(1.0, prevInertia))
      throw DataError("k-means: inertia increased (internal error)");
    prevInertia = inertia;

    // Serial centroid update keeps summation order fixed.
    std::vector<FeatureVector> next(k, FeatureVector(dim, 0.0));
    std::vector<long long> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[labels[i]];
      for (std::size_t d = 0; d < dim; ++d)
        next[labels[i]][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t d = 0; d < dim; ++d)
          next[c][d] /= static_cast<double>(counts[c]);

    // Reseed empty clusters to the point farthest from its own centroid.
    std::vector<bool> taken(n, false);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0)
        continue;
      std::size_t far = n;
      double farD2 = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i] && dist2[i] > farD2) {
          farD2 = dist2[i];
          far = i;
        }
      if (far == n)
        continue; // fewer distinct points than clusters
      next[c] = points[far];
      taken[far] = true;
      dist2[far] = 0.0;
    }

    double shiftNum = 0.0, shiftDen = 0.0;
    for (int c = 0; c < k; ++c) {
      shiftNum += std::sqrt(squaredDistance(next[c], centroids[c]));
      double norm = 0.0;
      for (double x : centroids[c])
        norm += x * x;
      shiftDen += std::sqrt(norm);
    }
    centroids = std::move(next);
    if (shiftNum <= 1e-6 * (shiftDen + 1e-12))
      break;
  }

  // Final assignment against the returned centroids, so classify() over the
  // training points reproduces these labels exactly.
  assignPointsParallel(points, centroids, labels, dist2);
  double inertia = 0.0;
  for (double d : dist2)
    inertia += d;

  KMeansModel model;
  model.centroids = std::move(centroids);
  model.k = k;
  model.seed = seed;
  model.inertia = inertia;
  model.schemaVersion = schemaVersion;
  return {std::move(model), ClusterAssignment{std::move(labels)}};
}

int elbowSelectK(const std::vector<FeatureVector>& points, int kMin, int kMax,
                 std::uint64_t seed) {
  if (kMin < 1 || kMin >= kMax)
    throw DataError("elbow: need 1 <= kMin < kMax");
  if (static_cast<std::size_t>(kMax) > points.size())
    throw DataError("elbow: kMax exceeds point count");

  std::vector<double> inertia;
  for (int k = kMin; k <= kMax; ++k)
    inertia.push_back(kmeansFit(points, k, seed).first.inertia);

  // Perpendicular distance from each (k, inertia(k)) to the chord between
  // the endpoints; degenerate chords fall through to kMin via the <= guard.
  double x1 = kMin, y1 = inertia.front();
  double x2 = kMax, y2 = inertia.back();
  double dy = y2 - y1, dx = x2 - x1;
  double norm = std::sqrt(dy * dy + dx * dx);

  int bestK = kMin;
  double bestDist = -1.0;
  for (int k = kMin; k <= kMax; ++k) {
    double y = inertia[k - kMin];
    double dist = std::abs(dy * k - dx * y + x2 * y1 - y2 * x1) / norm;
    if (dist > bestDist + 1e-12) {
      bestDist = dist;
      bestK = k;
    }
  }
  return bestK;
}

int classify(const KMeansModel& model, const FeatureVector& v) {
  if (model.centroids.empty())
    throw DataError("classify: empty model");
  if (v.size() != model.centroids[0].size())
    throw DataError("classify: feature dimension " + std::to_string(v.size()) +
                    " does not match model dimension " +
                    std::to_string(model.centroids[0].size()));
  double d2;
  return nearestCentroid(v, model.centroids, d2);
}

} // namespace passtune
