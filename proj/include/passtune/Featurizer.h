//===-- Featurizer.h - Static feature extraction from textual IR -*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Line-oriented token scanning of textual LLVM IR: no parser dependency, so
// it works unchanged across IR dialect versions. Comments (';' to end of
// line) are stripped with double-quoted strings respected, and multi-line
// switch tables are treated as one instruction. See docs/features.md for the
// exact counting rules and the schema.
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_FEATURIZER_H
#define PASSTUNE_FEATURIZER_H

#include "passtune/Core.h"

namespace passtune {

/// Names and version of one feature layout. Order and length are frozen per
/// version; knowledge-base files record the version they were built with.
struct FeatureSchema {
  std::vector<std::string> names;
  int version = 0;

  std::size_t dim() const { return names.size(); }
};

/// The 26-feature textual-IR schema (version 1).
const FeatureSchema& irFeatureSchema();

/// Raw counts from one scan of IR text.
struct IrScanCounts {
  long long totalInsts = 0;
  long long br = 0;
  long long condbr = 0;
  long long switchInsts = 0;
  long long ret = 0;
  long long call = 0;
  long long phi = 0;
  long long select = 0;
  long long load = 0;
  long long store = 0;
  long long alloca = 0;
  long long getelementptr = 0;
  long long icmp = 0;
  long long fcmp = 0;
  long long add = 0;
  long long sub = 0;
  long long mul = 0;
  long long div = 0;   // sdiv, udiv, fdiv
  long long logic = 0; // and, or, xor
  long long shift = 0; // shl, lshr, ashr
  long long ext = 0;   // zext, sext, trunc
  long long bitcast = 0;
  long long basicBlocks = 0; // label lines
  long long functions = 0;   // define lines
  long long maxBlockSize = 0;
};

IrScanCounts scanIr(std::string_view irText);

/// Instruction-line count of IR text; the counter behind the LLVM backend's
/// textual-count method. Zero is a legal result here.
long long countInstructions(std::string_view irText);

/// Feature vector of `p.source` under irFeatureSchema(). Empty source or a
/// module with no instructions is an error.
FeatureVector extractIrFeatures(const ProgramUnit& p);

/// Components divided by their sum, so the output is the proportional
/// composition (sums to 1). The all-zero vector is returned unchanged; a
/// negative component is an error.
FeatureVector l1Normalize(const FeatureVector& v);

} // namespace passtune

#endif // PASSTUNE_FEATURIZER_H
