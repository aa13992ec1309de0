#pragma once

#include "dendrift/denstream.hpp"
#include "dendrift/errors.hpp"
#include "dendrift/event_ingest.hpp"
#include "dendrift/factorization.hpp"
#include "dendrift/latent_io.hpp"
#include "dendrift/page_hinkley.hpp"
#include "dendrift/pipeline.hpp"
#include "dendrift/svg_plot.hpp"
#include "dendrift/synthesis.hpp"
