//===-- Featurizer.cpp - Static feature extraction from textual IR --------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Featurizer.h"

#include <algorithm>
#include <cctype>

namespace passtune {

const FeatureSchema& irFeatureSchema() {
  static const FeatureSchema schema{
      {"total_insts", "br",          "condbr",  "switch",
       "ret",         "call",        "phi",     "select",
       "load",        "store",       "alloca",  "getelementptr",
       "icmp",        "fcmp",        "add",     "sub",
       "mul",         "div",         "logic",   "shift",
       "ext",         "bitcast",     "basic_blocks", "functions",
       "mean_block_size", "max_block_size"},
      1};
  return schema;
}

namespace {

// Strips a ';' comment, honoring double-quoted strings (IR strings escape
// special characters as \xx, so a '"' always toggles string state).
std::string_view stripComment(std::string_view line) {
  bool inString = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"')
      inString = !inString;
    else if (c == ';' && !inString)
      return line.substr(0, i);
  }
  return line;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

std::vector<std::string_view> splitTokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])))
      ++j;
    if (j > i)
      out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// A label line is a single whitespace-free token ending in ':'.
bool isLabelLine(std::string_view line) {
  if (line.size() < 2 || line.back() != ':')
    return false;
  std::string_view head = line.substr(0, line.size() - 1);
  return head.find_first_of(" \t") == std::string_view::npos;
}

void countOpcode(IrScanCounts& c, const std::vector<std::string_view>& toks) {
  std::size_t i = 0;
  if (toks[0].front() == '%' && toks.size() >= 3 && toks[1] == "=")
    i = 2;
  // Skip call markers: "tail call", "%x = musttail call ...".
  while (i < toks.size() &&
         (toks[i] == "tail" || toks[i] == "musttail" || toks[i] == "notail"))
    ++i;
  if (i >= toks.size())
    return;
  std::string_view op = toks[i];

  if (op == "br") {
    ++c.br;
    if (i + 1 < toks.size() && toks[i + 1] == "i1")
      ++c.condbr;
  } else if (op == "switch")
    ++c.switchInsts;
  else if (op == "ret")
    ++c.ret;
  else if (op == "call")
    ++c.call;
  else if (op == "phi")
    ++c.phi;
  else if (op == "select")
    ++c.select;
  else if (op == "load")
    ++c.load;
  else if (op == "store")
    ++c.store;
  else if (op == "alloca")
    ++c.alloca;
  else if (op == "getelementptr")
    ++c.getelementptr;
  else if (op == "icmp")
    ++c.icmp;
  else if (op == "fcmp")
    ++c.fcmp;
  else if (op == "add")
    ++c.add;
  else if (op == "sub")
    ++c.sub;
  else if (op == "mul")
    ++c.mul;
  else if (op == "sdiv" || op == "udiv" || op == "fdiv")
    ++c.div;
  else if (op == "and" || op == "or" || op == "xor")
    ++c.logic;
  else if (op == "shl" || op == "lshr" || op == "ashr")
    ++c.shift;
  else if (op == "zext" || op == "sext" || op == "trunc")
    ++c.ext;
  else if (op == "bitcast")
    ++c.bitcast;
}

} // namespace

IrScanCounts scanIr(std::string_view irText) {
  IrScanCounts c;
  bool inFunction = false;
  bool inSwitchTable = false;
  long long blockSize = 0;

  auto closeBlock = [&] {
    c.maxBlockSize = std::max(c.maxBlockSize, blockSize);
    blockSize = 0;
  };

  std::size_t pos = 0;
  while (pos <= irText.size()) {
    std::size_t nl = irText.find('\n', pos);
    std::string_view raw = irText.substr(
        pos, nl == std::string_view::npos ? irText.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? irText.size() + 1 : nl + 1;

    std::string_view line = trim(stripComment(raw));
    if (line.empty())
      continue;

    if (!inFunction) {
      if (line.substr(0, 7) == "define " || line == "define") {
        ++c.functions;
        inFunction = true;
        blockSize = 0;
      }
      continue;
    }

    if (inSwitchTable) {
      if (line.back() == ']')
        inSwitchTable = false;
      continue;
    }
    if (line == "}") {
      closeBlock();
      inFunction = false;
      continue;
    }
    if (isLabelLine(line)) {
      closeBlock();
      ++c.basicBlocks;
      continue;
    }

    ++c.totalInsts;
    ++blockSize;
    countOpcode(c, splitTokens(line));
    if (line.back() == '[')
      inSwitchTable = true; // switch case table spans following lines
  }
  if (inFunction)
    closeBlock();
  return c;
}

long long countInstructions(std::string_view irText) {
  return scanIr(irText).totalInsts;
}

FeatureVector extractIrFeatures(const ProgramUnit& p) {
  if (p.source.empty())
    throw DataError("empty program: " + p.id);
  IrScanCounts c = scanIr(p.source);
  if (c.totalInsts == 0)
    throw DataError("empty program: " + p.id);

  double meanBlock = c.basicBlocks == 0
                         ? 0.0
                         : static_cast<double>(c.totalInsts) /
                               static_cast<double>(c.basicBlocks);
  FeatureVector v = {
      static_cast<double>(c.totalInsts),
      static_cast<double>(c.br),
      static_cast<double>(c.condbr),
      static_cast<double>(c.switchInsts),
      static_cast<double>(c.ret),
      static_cast<double>(c.call),
      static_cast<double>(c.phi),
      static_cast<double>(c.select),
      static_cast<double>(c.load),
      static_cast<double>(c.store),
      static_cast<double>(c.alloca),
      static_cast<double>(c.getelementptr),
      static_cast<double>(c.icmp),
      static_cast<double>(c.fcmp),
      static_cast<double>(c.add),
      static_cast<double>(c.sub),
      static_cast<double>(c.mul),
      static_cast<double>(c.div),
      static_cast<double>(c.logic),
      static_cast<double>(c.shift),
      static_cast<double>(c.ext),
      static_cast<double>(c.bitcast),
      static_cast<double>(c.basicBlocks),
      static_cast<double>(c.functions),
      meanBlock,
      static_cast<double>(c.maxBlockSize),
  };
  return v;
}

FeatureVector l1Normalize(const FeatureVector& v) {
  double sum = 0.0;
  for (double x : v) {
    if (x < 0)
      throw DataError("negative feature component");
    sum += x;
  }
  if (sum == 0.0)
    return v;
  FeatureVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = v[i] / sum;
  return out;
}

} // namespace passtune
