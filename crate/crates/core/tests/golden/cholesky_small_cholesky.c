/* cholesky_small_cholesky: cholesky specialized for one sparsity pattern, n = 10 */
#include <math.h>

static const int cholesky_small_cholesky_blockRowPattern_ptr[8] = {
    0, 0, 0, 1, 4, 4, 5, 7,
};
static const int cholesky_small_cholesky_blockRowPattern_idx[7] = {
    1, 0, 1, 2, 3, 4, 5,
};
static const int cholesky_small_cholesky_supernodes_start[8] = {
    0, 1, 2, 3, 5, 8, 9, 10,
};
static const int cholesky_small_cholesky_supernodes_rowptr[8] = {
    0, 3, 6, 9, 12, 16, 18, 19,
};
static const int cholesky_small_cholesky_supernodes_rows[19] = {
    0, 3, 4, 1, 2, 4, 2, 3, 4, 3, 4, 8, 5, 6, 7, 9,
    8, 9, 9,
};

static double cholesky_small_cholesky_panel[12];
static int cholesky_small_cholesky_map[10];

static void cholesky_small_cholesky_supernodes_gather(int b, const double* Mx, const int* Mp, const int* Mi) {
    const int s = cholesky_small_cholesky_supernodes_start[b], w = cholesky_small_cholesky_supernodes_start[b + 1] - s;
    const int m = cholesky_small_cholesky_supernodes_rowptr[b + 1] - cholesky_small_cholesky_supernodes_rowptr[b];
    const int* rows = cholesky_small_cholesky_supernodes_rows + cholesky_small_cholesky_supernodes_rowptr[b];
    for (int i = 0; i < m * w; i++) cholesky_small_cholesky_panel[i] = 0.0;
    for (int i = 0; i < m; i++) cholesky_small_cholesky_map[rows[i]] = i;
    for (int c = 0; c < w; c++)
        for (int p = Mp[s + c]; p < Mp[s + c + 1]; p++)
            cholesky_small_cholesky_panel[cholesky_small_cholesky_map[Mi[p]] + c * m] = Mx[p];
}

static void cholesky_small_cholesky_supernodes_scatter(int b, double* Lx, const int* Lp, const int* Li) {
    const int s = cholesky_small_cholesky_supernodes_start[b], w = cholesky_small_cholesky_supernodes_start[b + 1] - s;
    const int m = cholesky_small_cholesky_supernodes_rowptr[b + 1] - cholesky_small_cholesky_supernodes_rowptr[b];
    for (int c = 0; c < w; c++)
        for (int p = Lp[s + c]; p < Lp[s + c + 1]; p++)
            Lx[p] = cholesky_small_cholesky_panel[cholesky_small_cholesky_map[Li[p]] + c * m];
}

static int cholesky_small_cholesky_supernodes_chol(int b) {
    const int s = cholesky_small_cholesky_supernodes_start[b], w = cholesky_small_cholesky_supernodes_start[b + 1] - s;
    const int m = cholesky_small_cholesky_supernodes_rowptr[b + 1] - cholesky_small_cholesky_supernodes_rowptr[b];
    double* P = cholesky_small_cholesky_panel;
    switch (w) {
    case 1: {
        if (!(P[0] > 0.0)) return s + 0 + 1;
        P[0] = sqrt(P[0]);
        return 0;
    }
    case 2: {
        if (!(P[0] > 0.0)) return s + 0 + 1;
        P[0] = sqrt(P[0]);
        P[1] /= P[0];
        P[1 + m] -= P[1] * P[1];
        if (!(P[1 + m] > 0.0)) return s + 1 + 1;
        P[1 + m] = sqrt(P[1 + m]);
        P[m] = 0.0;
        return 0;
    }
    case 3: {
        if (!(P[0] > 0.0)) return s + 0 + 1;
        P[0] = sqrt(P[0]);
        P[1] /= P[0];
        P[2] /= P[0];
        P[1 + m] -= P[1] * P[1];
        P[2 + m] -= P[2] * P[1];
        if (!(P[1 + m] > 0.0)) return s + 1 + 1;
        P[1 + m] = sqrt(P[1 + m]);
        P[2 + m] /= P[1 + m];
        P[m] = 0.0;
        P[2 + 2 * m] -= P[2] * P[2];
        P[2 + 2 * m] -= P[2 + m] * P[2 + m];
        if (!(P[2 + 2 * m] > 0.0)) return s + 2 + 1;
        P[2 + 2 * m] = sqrt(P[2 + 2 * m]);
        P[2 * m] = 0.0;
        P[1 + 2 * m] = 0.0;
        return 0;
    }
    default:
        break;
    }
    for (int j = 0; j < w; j++) {
        for (int k = 0; k < j; k++)
            for (int i = j; i < w; i++) P[i + j * m] -= P[i + k * m] * P[j + k * m];
        if (!(P[j + j * m] > 0.0)) return s + j + 1;
        P[j + j * m] = sqrt(P[j + j * m]);
        for (int i = j + 1; i < w; i++) P[i + j * m] /= P[j + j * m];
        for (int i = 0; i < j; i++) P[i + j * m] = 0.0;
    }
    return 0;
}

static void cholesky_small_cholesky_supernodes_trisolve_panel(int b) {
    const int s = cholesky_small_cholesky_supernodes_start[b], w = cholesky_small_cholesky_supernodes_start[b + 1] - s;
    const int m = cholesky_small_cholesky_supernodes_rowptr[b + 1] - cholesky_small_cholesky_supernodes_rowptr[b];
    double* P = cholesky_small_cholesky_panel;
    (void)s;
    switch (w) {
    case 1: {
        for (int r = 1; r < m; r++) P[r + 0 * m] /= P[0];
        return;
    }
    case 2: {
        for (int r = 2; r < m; r++) P[r + 0 * m] /= P[0];
        for (int r = 2; r < m; r++) P[r + 1 * m] -= P[r + 0 * m] * P[1];
        for (int r = 2; r < m; r++) P[r + 1 * m] /= P[1 + m];
        return;
    }
    case 3: {
        for (int r = 3; r < m; r++) P[r + 0 * m] /= P[0];
        for (int r = 3; r < m; r++) P[r + 1 * m] -= P[r + 0 * m] * P[1];
        for (int r = 3; r < m; r++) P[r + 1 * m] /= P[1 + m];
        for (int r = 3; r < m; r++) P[r + 2 * m] -= P[r + 0 * m] * P[2];
        for (int r = 3; r < m; r++) P[r + 2 * m] -= P[r + 1 * m] * P[2 + m];
        for (int r = 3; r < m; r++) P[r + 2 * m] /= P[2 + 2 * m];
        return;
    }
    default:
        break;
    }
    for (int j = 0; j < w; j++) {
        for (int k = 0; k < j; k++)
            for (int r = w; r < m; r++) P[r + j * m] -= P[r + k * m] * P[j + k * m];
        for (int r = w; r < m; r++) P[r + j * m] /= P[j + j * m];
    }
}

static void cholesky_small_cholesky_supernodes_update(int b, int d, const double* Lx, const int* Lp, const int* Li) {
    const int sb = cholesky_small_cholesky_supernodes_start[b], eb = cholesky_small_cholesky_supernodes_start[b + 1];
    const int m = cholesky_small_cholesky_supernodes_rowptr[b + 1] - cholesky_small_cholesky_supernodes_rowptr[b];
    for (int k = cholesky_small_cholesky_supernodes_start[d]; k < cholesky_small_cholesky_supernodes_start[d + 1]; k++) {
        int lo = Lp[k], hi = Lp[k + 1];
        while (lo < hi) {
            const int mid = lo + (hi - lo) / 2;
            if (Li[mid] < sb) lo = mid + 1;
            else hi = mid;
        }
        for (int q = lo; q < Lp[k + 1] && Li[q] < eb; q++) {
            const int c = Li[q] - sb;
            const double ljk = Lx[q];
            for (int r = q; r < Lp[k + 1]; r++) cholesky_small_cholesky_panel[cholesky_small_cholesky_map[Li[r]] + c * m] -= Lx[r] * ljk;
        }
    }
}

int cholesky_small_cholesky(const double* Ax, const int* Ap, const int* Ai, double* Lx, const int* Lp, const int* Li) {
    (void)Ax;
    (void)Ap;
    (void)Ai;
    (void)Lp;
    (void)Li;
    for (int b = 0; b < 7; b++) {
        cholesky_small_cholesky_supernodes_gather(b, Ax, Ap, Ai);
        /* distribute */
        for (int dp = cholesky_small_cholesky_blockRowPattern_ptr[b]; dp < cholesky_small_cholesky_blockRowPattern_ptr[b + 1]; dp++) {
            cholesky_small_cholesky_supernodes_update(b, cholesky_small_cholesky_blockRowPattern_idx[dp], Lx, Lp, Li);
        }
        {
            const int info = cholesky_small_cholesky_supernodes_chol(b);
            if (info) return info;
        }
        cholesky_small_cholesky_supernodes_trisolve_panel(b);
        cholesky_small_cholesky_supernodes_scatter(b, Lx, Lp, Li);
    }
    return 0;
}
