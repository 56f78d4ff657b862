// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/track/memory.hpp"

#include <algorithm>

#include "ssmtrack/core/errors.hpp"

namespace ssmtrack::track {

std::vector<std::size_t> select_template_indices(std::size_t current_frame, std::size_t capacity) {
  require(capacity >= 1, "select_template_indices: capacity must be >= 1");
  if (capacity == 1) return {0};
  const std::size_t k = current_frame / capacity;
  std::vector<std::size_t> idx{0};
  for (std::size_t i = 0; i < capacity; ++i) idx.push_back(i * k + k / 2);
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (idx.size() > capacity) idx.erase(idx.begin() + 1, idx.end() - static_cast<std::ptrdiff_t>(capacity - 1));
  return idx;
}

TemplateMemory::TemplateMemory(std::size_t capacity, TemplateCrop first) : capacity_(capacity) {
  require(capacity >= 1, "TemplateMemory: capacity must be >= 1");
  archive_.emplace(0, std::move(first));
  frames_seen_ = 1;
  indices_ = select_template_indices(frames_seen_, capacity_);
}

void TemplateMemory::update(TemplateCrop crop) {
  require(frames_seen_ >= 1, "TemplateMemory: not initialized");
  archive_.emplace(frames_seen_, std::move(crop));
  ++frames_seen_;
  indices_ = select_template_indices(frames_seen_, capacity_);
}

std::vector<const TemplateCrop*> TemplateMemory::model_slots() const {
  std::vector<const TemplateCrop*> slots(capacity_ - indices_.size(), &archive_.at(0));
  for (std::size_t f : indices_) slots.push_back(&archive_.at(f));
  return slots;
}

void TrajectoryQueue::push(const Box& b) {
  if (capacity_ == 0) return;
  entries_.push_back(b);
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::vector<Box> TrajectoryQueue::padded() const {
  if (capacity_ == 0) return {};
  require(!entries_.empty(), "TrajectoryQueue: cannot pad an empty queue");
  std::vector<Box> out(capacity_ - entries_.size(), entries_.front());
  out.insert(out.end(), entries_.begin(), entries_.end());
  return out;
}

}  // namespace ssmtrack::track
