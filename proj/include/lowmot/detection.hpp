#pragma once

#include <stdexcept>
#include <utility>

#include "lowmot/bbox.hpp"
#include "lowmot/embedding.hpp"

namespace lowmot {

// One detector output: time-stamped box, confidence and appearance feature.
struct Detection {
  double frame_time;  // seconds of video time
  BBox bbox;
  double confidence;
  Embedding embedding;

  Detection(double frame_time, BBox bbox, double confidence,
            Embedding embedding)
      : frame_time(frame_time),
        bbox(bbox),
        confidence(confidence),
        embedding(std::move(embedding)) {
    if (frame_time < 0.0) {
      throw std::invalid_argument("Detection: negative frame time");
    }
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
      throw std::invalid_argument("Detection: confidence out of [0,1]");
    }
  }
};

}  // namespace lowmot
