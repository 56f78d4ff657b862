// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once
// Template memory governed by the closed-form selection rule, and the FIFO
// trajectory queue of past boxes.
#include <cstddef>
#include <deque>
#include <map>
#include <vector>

#include "ssmtrack/core/box.hpp"
#include "ssmtrack/core/image.hpp"

namespace ssmtrack::track {

// {0} for M = 1; otherwise {0} u {i*K + floor(K/2) : 0 <= i < M} with K = floor(C/M),
// sorted and deduplicated, then capped to {0} plus the M-1 largest dynamic indices.
std::vector<std::size_t> select_template_indices(std::size_t current_frame, std::size_t capacity);

struct TemplateCrop {
  Image rgb;
  Image tir;
};

class TemplateMemory {
 public:
  TemplateMemory() = default;
  // Frame 0's crop is the ground-truth initialization.
  TemplateMemory(std::size_t capacity, TemplateCrop first);

  std::size_t capacity() const { return capacity_; }
  // Number of frames seen so far; slots hold select_template_indices(frames_seen(), M).
  std::size_t frames_seen() const { return frames_seen_; }
  const std::vector<std::size_t>& indices() const { return indices_; }

  // Records the crop of frame frames_seen() and advances to the next frame.
  void update(TemplateCrop crop);

  // Exactly `capacity()` slots in ascending frame order; missing slots repeat frame 0.
  std::vector<const TemplateCrop*> model_slots() const;
  const TemplateCrop& crop(std::size_t frame) const { return archive_.at(frame); }

 private:
  std::size_t capacity_ = 1;
  std::size_t frames_seen_ = 0;
  std::vector<std::size_t> indices_;
  // Past crops stay addressable because later index sets may reach back to any frame.
  std::map<std::size_t, TemplateCrop> archive_;
};

class TrajectoryQueue {
 public:
  explicit TrajectoryQueue(std::size_t capacity = 0) : capacity_(capacity) {}

  void push(const Box& b);
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<Box> entries() const { return {entries_.begin(), entries_.end()}; }
  // Exactly capacity() boxes, oldest first, front-padded with the oldest entry.
  std::vector<Box> padded() const;

 private:
  std::size_t capacity_;
  std::deque<Box> entries_;
};

}  // namespace ssmtrack::track
