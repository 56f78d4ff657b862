// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/track/tracker.hpp"

#include "ssmtrack/track/crop.hpp"

namespace ssmtrack::track {

HeadOutput OraclePredictor::predict(const PredictorInput& in) {
  require(in.frame_index < truth_.size(), "OraclePredictor: frame beyond ground truth");
  HeadOutput out;
  out.box = embed::map_to_search_coords(truth_[in.frame_index], in.crop);
  out.confidence = 1.0;
  return out;
}

template <typename T>
HeadOutput NetworkPredictor<T>::predict(const PredictorInput& in) {
  NetInput net{in.templates, in.search_rgb, in.search_tir, in.prompts};
  const auto out = net_forward(params_, cfg_, net);
  return decode_head(out.maps, cfg_.grid());
}

template class NetworkPredictor<float>;
template class NetworkPredictor<double>;

TemplateCrop crop_template(const Image& rgb, const Image& tir, const Box& box, const TrackerOptions& opt) {
  const auto window = crop_window(box, opt.template_factor, rgb.width, rgb.height);
  return {resample_window(rgb, window, opt.template_size), resample_window(tir, window, opt.template_size)};
}

TrackerState init_tracker(const Image& rgb, const Image& tir, const Box& gt, const TrackerOptions& opt) {
  require(rgb.width == tir.width && rgb.height == tir.height, "tracker: RGB and TIR frames differ in size");
  require(gt.valid(), "tracker: initial box must have positive extent");
  TrackerState s;
  s.frame_width = rgb.width;
  s.frame_height = rgb.height;
  s.last_box = clamp_box(gt, static_cast<double>(rgb.width), static_cast<double>(rgb.height));
  s.memory = TemplateMemory(opt.templates, crop_template(rgb, tir, s.last_box, opt));
  s.queue = TrajectoryQueue(opt.trajectory);
  s.queue.push(s.last_box);
  s.frame_counter = 1;
  return s;
}

StepResult track_step(TrackerState& state, const Image& rgb, const Image& tir, Predictor& model,
                      const TrackerOptions& opt) {
  require(rgb.width == state.frame_width && rgb.height == state.frame_height && tir.width == rgb.width &&
              tir.height == rgb.height,
          "tracker: frame size changed mid-sequence");
  const auto window = crop_window(state.last_box, opt.search_factor, rgb.width, rgb.height);
  const Image search_rgb = resample_window(rgb, window, opt.search_size);
  const Image search_tir = resample_window(tir, window, opt.search_size);

  PredictorInput in;
  in.frame_index = state.frame_counter;
  in.templates = state.memory.model_slots();
  in.search_rgb = &search_rgb;
  in.search_tir = &search_tir;
  in.crop = window;
  for (const Box& b : state.queue.padded()) in.prompts.push_back(embed::map_to_search_coords(b, window));

  const HeadOutput head = model.predict(in);
  const Box abs = embed::map_from_search_coords(head.box, window);
  StepResult r;
  r.box = clamp_box(abs, static_cast<double>(rgb.width), static_cast<double>(rgb.height));
  r.confidence = head.confidence;

  state.queue.push(r.box);
  state.memory.update(crop_template(rgb, tir, r.box, opt));
  state.last_box = r.box;
  ++state.frame_counter;
  return r;
}

std::vector<TrackRecord> track_sequence(const std::vector<Image>& rgb, const std::vector<Image>& tir,
                                        const Box& init_box, Predictor& model, const TrackerOptions& opt) {
  require(!rgb.empty() && rgb.size() == tir.size(), "track_sequence: need equal, non-empty RGB/TIR frame lists");
  TrackerState state = init_tracker(rgb[0], tir[0], init_box, opt);
  std::vector<TrackRecord> out{{0, state.last_box, 1.0}};
  for (std::size_t f = 1; f < rgb.size(); ++f) {
    const StepResult r = track_step(state, rgb[f], tir[f], model, opt);
    out.push_back({f, r.box, r.confidence});
  }
  return out;
}

}  // namespace ssmtrack::track
