#include "dllab/dllab.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>

#include "dllab/io.hpp"

struct dllab_hamiltonian {
    std::shared_ptr<const dllab::HamiltonianSpec> spec;
};

struct dllab_ground_space {
    dllab::GroundSpaceData data;
};

namespace {

    thread_local std::string last_error;

    dllab_status fail(dllab_status s, const std::string &msg) {
        last_error = msg;
        return s;
    }

    // Runs `body`, mapping exceptions onto status codes.
    template <class F> dllab_status guarded(F &&body) {
        try {
            last_error.clear();
            body();
            return DLLAB_OK;
        } catch(const dllab::Error &e) {
            return fail(static_cast<dllab_status>(static_cast<int>(e.code())), e.what());
        } catch(const nlohmann::json::exception &e) {
            return fail(DLLAB_PARSE, e.what());
        } catch(const std::bad_alloc &) {
            return fail(DLLAB_DIMENSION_CAP, "out of memory");
        } catch(const std::exception &e) {
            return fail(DLLAB_INTERNAL, e.what());
        } catch(...) {
            return fail(DLLAB_INTERNAL, "unknown failure");
        }
    }

    char *dup(const std::string &s) {
        char *out = static_cast<char *>(std::malloc(s.size() + 1));
        if(!out) throw std::bad_alloc();
        std::memcpy(out, s.c_str(), s.size() + 1);
        return out;
    }

    void need(const void *p, const char *what) {
        if(!p) throw dllab::Error(dllab::ErrorCode::InvalidArgument, std::string(what) + " is null");
    }

    dllab::Json parse_text(const char *text, const char *what) {
        try {
            return dllab::Json::parse(text);
        } catch(const dllab::Json::parse_error &e) {
            throw dllab::Error(dllab::ErrorCode::Parse, std::string(what) + ": " + e.what());
        }
    }

} // namespace

extern "C" {

const char *dllab_version(void) { return dllab::kVersion; }

const char *dllab_last_error(void) { return last_error.c_str(); }

const char *dllab_status_name(dllab_status status) {
    if(status == DLLAB_OK) return "ok";
    if(status == DLLAB_INTERNAL) return "internal";
    if(status >= 1 && status <= 11) return dllab::to_string(static_cast<dllab::ErrorCode>(status));
    return "unknown";
}

void dllab_string_free(char *s) { std::free(s); }

dllab_status dllab_model_list(char **out_json) {
    return guarded([&] {
        need(out_json, "out_json");
        dllab::Json arr = dllab::Json::array();
        for(const auto &d : dllab::model_catalog()) arr.push_back(dllab::model_descriptor_to_json(d));
        *out_json = dup(arr.dump());
    });
}

dllab_status dllab_model_build(const char *descriptor_json, dllab_hamiltonian **out) {
    return guarded([&] {
        need(descriptor_json, "descriptor_json");
        need(out, "out");
        const auto model = dllab::build_model(dllab::model_descriptor_from_json(parse_text(descriptor_json, "model descriptor")));
        *out             = new dllab_hamiltonian{model.hamiltonian};
    });
}

dllab_status dllab_hamiltonian_from_json(const char *doc, dllab_hamiltonian **out) {
    return guarded([&] {
        need(doc, "doc");
        need(out, "out");
        auto spec = std::make_shared<dllab::HamiltonianSpec>(dllab::hamiltonian_from_json(parse_text(doc, "hamiltonian document")));
        *out      = new dllab_hamiltonian{std::move(spec)};
    });
}

dllab_status dllab_hamiltonian_load(const char *path, dllab_hamiltonian **out) {
    return guarded([&] {
        need(path, "path");
        const std::string text = dllab::read_file(path);
        need(out, "out");
        auto spec = std::make_shared<dllab::HamiltonianSpec>(dllab::hamiltonian_from_json(parse_text(text.c_str(), path)));
        *out      = new dllab_hamiltonian{std::move(spec)};
    });
}

dllab_status dllab_hamiltonian_to_json(const dllab_hamiltonian *h, char **out_json) {
    return guarded([&] {
        need(h, "hamiltonian");
        need(out_json, "out_json");
        *out_json = dup(dllab::dump_json(dllab::hamiltonian_to_json(*h->spec)));
    });
}

dllab_status dllab_hamiltonian_info_get(const dllab_hamiltonian *h, dllab_hamiltonian_info *out) {
    return guarded([&] {
        need(h, "hamiltonian");
        need(out, "out");
        const auto &s   = *h->spec;
        const auto part = dllab::partition_layers(s);
        out->n              = s.sites().n();
        out->d              = s.sites().d();
        out->dim            = s.sites().dim();
        out->terms          = s.m();
        out->k              = s.locality();
        out->g              = static_cast<int32_t>(part.g());
        out->one_d          = dllab::is_one_d_chain(s, part) ? 1 : 0;
        out->all_projectors = s.all_projectors() ? 1 : 0;
    });
}

void dllab_hamiltonian_free(dllab_hamiltonian *h) { delete h; }

dllab_status dllab_ground_space_compute(const dllab_hamiltonian *h, dllab_ground_space **out) {
    return guarded([&] {
        need(h, "hamiltonian");
        need(out, "out");
        *out = new dllab_ground_space{dllab::ground_space(*h->spec)};
    });
}

dllab_status dllab_ground_space_summary(const dllab_ground_space *gs, double *ground_energy, double *gap, int32_t *degeneracy) {
    return guarded([&] {
        need(gs, "ground space");
        if(ground_energy) *ground_energy = gs->data.ground_energy;
        if(gap) *gap = gs->data.gap;
        if(degeneracy) *degeneracy = gs->data.degeneracy();
    });
}

void dllab_ground_space_free(dllab_ground_space *gs) { delete gs; }

dllab_status dllab_dl_bound(double epsilon, int32_t k, int32_t g, int32_t one_d, double *out) {
    return guarded([&] {
        need(out, "out");
        *out = dllab::dl_bound(epsilon, k, g, one_d != 0);
    });
}

dllab_status dllab_measure_shrinkage(const dllab_hamiltonian *h, const dllab_ground_space *gs, dllab_shrinkage *out) {
    return guarded([&] {
        need(h, "hamiltonian");
        need(gs, "ground space");
        need(out, "out");
        if(!h->spec->all_projectors()) throw dllab::Error(dllab::ErrorCode::InvalidArgument, "shrinkage needs projector terms");
        const dllab::DLOperator a(h->spec);
        const auto rep          = dllab::measure_shrinkage(a, gs->data);
        out->epsilon            = rep.epsilon;
        out->f_bound            = rep.f_bound;
        out->theoretical_bound  = rep.theoretical_bound;
        out->measured_shrinkage = rep.measured_shrinkage;
        out->pass               = rep.pass ? 1 : 0;
    });
}

dllab_status dllab_run(const char *config_text, const char *base_dir, const char *out_dir, const char *format, char **report_json,
                       int32_t *overall_pass) {
    return guarded([&] {
        need(config_text, "config_text");
        const auto cfg    = dllab::parse_run_config(config_text);
        const auto fmt    = dllab::output_format_from_string(format ? format : "structured");
        const auto result = dllab::run(cfg, base_dir ? base_dir : ".");
        if(out_dir) dllab::emit_report(result, out_dir, fmt);
        if(report_json) *report_json = dup(dllab::dump_json(dllab::report_to_json(result.report)));
        if(overall_pass) *overall_pass = result.report.overall_pass() ? 1 : 0;
    });
}

} // extern "C"
