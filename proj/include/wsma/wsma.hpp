#ifndef WSMA_WSMA_HPP
#define WSMA_WSMA_HPP

#include "wsma/annotate.hpp"
#include "wsma/boxes.hpp"
#include "wsma/config.hpp"
#include "wsma/contour.hpp"
#include "wsma/error.hpp"
#include "wsma/eval.hpp"
#include "wsma/grid.hpp"
#include "wsma/heatmap.hpp"
#include "wsma/iou.hpp"
#include "wsma/merge.hpp"
#include "wsma/mspseg.hpp"
#include "wsma/pipeline.hpp"
#include "wsma/raster.hpp"
#include "wsma/synth.hpp"

#endif  // WSMA_WSMA_HPP
