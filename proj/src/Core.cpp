//===-- Core.cpp - Shared domain types for pass tuning --------------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Core.h"

#include <mutex>

namespace passtune {

bool isValidPassName(std::string_view name) {
  if (name.empty())
    return false;
  for (unsigned char c : name) {
    if (c <= 0x20 || c == 0x7f || c == '|')
      return false;
  }
  return true;
}

PassUniverse::PassUniverse(std::vector<PassId> passes)
    : passes_(std::move(passes)) {
  if (passes_.empty())
    throw DataError("pass universe must be nonempty");
  for (std::size_t i = 0; i < passes_.size(); ++i) {
    const std::string& name = passes_[i].name;
    if (!isValidPassName(name))
      throw DataError("invalid pass name: '" + name + "'");
    auto [it, inserted] = index_.emplace(name, static_cast<int>(i));
    if (!inserted)
      throw DataError("duplicate pass in universe: '" + name + "'");
  }
}

int PassUniverse::indexOf(const PassId& p) const {
  auto it = index_.find(p.name);
  return it == index_.end() ? -1 : it->second;
}

const char* originName(Origin o) {
  switch (o) {
  case Origin::prototype:
    return "prototype";
  case Origin::crossover:
    return "crossover";
  case Origin::mutation:
    return "mutation";
  case Origin::random:
    return "random";
  case Origin::seed:
    return "seed";
  }
  return "unknown";
}

std::string canonicalKey(const PassSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.passes.size(); ++i) {
    if (i > 0)
      out += '|';
    out += seq.passes[i].name;
  }
  return out;
}

std::string fnv1aHex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

ProgramUnit ProgramUnit::fromSource(std::string id, std::string source) {
  ProgramUnit p;
  p.id = std::move(id);
  p.digest = fnv1aHex(source);
  p.source = std::move(source);
  return p;
}

std::string EvalCache::makeKey(const ProgramUnit& p, const PassSequence& seq,
                               const std::string& backendId) {
  // 0x1f cannot occur in pass names or digests, so the key is injective.
  return p.digest + '\x1f' + canonicalKey(seq) + '\x1f' + backendId;
}

std::string EvalCache::makeBaselineKey(const ProgramUnit& p,
                                       const std::string& backendId) {
  // Leading 0x01 keeps this disjoint from every canonical sequence key.
  return p.digest + '\x1f' + "\x01" "baseline" + '\x1f' + backendId;
}

std::optional<long long> EvalCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end())
    return std::nullopt;
  return it->second;
}

void EvalCache::insert(const std::string& key, long long value) {
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.emplace(key, value);
  if (!inserted && it->second != value)
    throw CachePoisonError(
        "nondeterministic backend: cache key re-inserted with a different "
        "count (" +
        std::to_string(it->second) + " vs " + std::to_string(value) + ")");
}

std::size_t EvalCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

} // namespace passtune
