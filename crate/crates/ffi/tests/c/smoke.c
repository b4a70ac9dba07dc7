#include <stdio.h>
#include <string.h>
#include "kinsim.h"

int main(void) {
    KinsimLibraryConfig config;
    KinsimAnalysisOptions options;
    KinsimLibrary *lib = NULL;
    KinsimAnalysis *analysis = NULL;
    KinsimFig9Row row;
    double xs[6] = {0, 1, 2, 3, 4, 5};
    double ys[6] = {1, 3, 2, 5, 4, 6};
    KinsimCubicFit fit;

    if (kinsim_library_config_default(&config) != KINSIM_STATUS_OK) return 10;
    if (kinsim_analysis_options_default(&options) != KINSIM_STATUS_OK) return 11;
    config.runs = 5;
    config.target_size = 80;
    options.pair_sample = 1000;

    if (kinsim_library_build(&config, 1, &lib) != KINSIM_STATUS_OK) {
        fprintf(stderr, "%s\n", kinsim_last_error_message());
        return 12;
    }
    if (kinsim_analysis_run(lib, &options, 1, &analysis) != KINSIM_STATUS_OK) return 13;
    if (kinsim_analysis_fig9_row(analysis, 1, &row) != KINSIM_STATUS_OK) return 14;
    if (row.n_pairs != 1000) return 15;
    if (kinsim_analysis_fig9_row(analysis, 5, &row) != KINSIM_STATUS_OUT_OF_RANGE) return 16;
    if (kinsim_last_error_message() == NULL) return 17;
    if (kinsim_cubic_fit(xs, ys, 6, &fit) != KINSIM_STATUS_OK || fit.effective_degree != 3) return 18;
    if (kinsim_library_build(NULL, 1, &lib) != KINSIM_STATUS_NULL_POINTER) return 19;

    kinsim_analysis_free(analysis);
    kinsim_library_free(lib);
    printf("kinsim %s ok\n", kinsim_version());
    return 0;
}
