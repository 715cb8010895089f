# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled step loop. Mirrors ``_pykernel.run_loop`` operation for operation."""

from libc.stdlib cimport malloc, realloc, free

BACKEND = "cython"


cdef inline long long _grow(long long **buf, long long cap) except -1:
    cdef long long *p = <long long *> realloc(buf[0], 2 * cap * sizeof(long long))
    if p == NULL:
        raise MemoryError()
    buf[0] = p
    return 2 * cap


def run_loop(bids, expectations, double price, history, long long step,
             long long deals_done, long long last_deal_step,
             double spread, double greed, double eps_buyer, double eps_seller,
             int policy, int seller_mode, long long window,
             long long max_steps, long long target_deals, bint record_steps):
    cdef Py_ssize_t n_dealers = len(bids)
    cdef Py_ssize_t i, j, buyer
    cdef double *b = <double *> malloc(n_dealers * sizeof(double))
    cdef double *a = <double *> malloc(n_dealers * sizeof(double))
    cdef double *d = <double *> malloc(n_dealers * sizeof(double))
    cdef long long cap = len(history) + 1024
    cdef long long *hist = <long long *> malloc(cap * sizeof(long long))
    if b == NULL or a == NULL or d == NULL or hist == NULL:
        free(b); free(a); free(d); free(hist)
        raise MemoryError()

    cdef double hi, lo, mu, seller_delta, buyer_delta, total
    cdef long long n, full_sum = 0, win_sum = 0, k
    cdef bint uses_mu = policy == 2 or policy == 3

    rec_step = []
    rec_price = []
    rec_buyer = []
    rec_n = []
    rec_mu = []
    rec_sum = []
    step_prices = [] if record_steps else None

    try:
        for i in range(n_dealers):
            b[i] = bids[i]
            a[i] = expectations[i]
            d[i] = 0.0
        for k in range(len(history)):
            hist[k] = history[k]
            full_sum += hist[k]
        if window > 0:
            for k in range(max(0, deals_done - window), deals_done):
                win_sum += hist[k]

        if policy == 1 or policy == 3:
            buyer_delta = -(greed * (1.0 + eps_buyer))
        else:
            buyer_delta = -greed

        while step < max_steps and (target_deals < 0 or deals_done < target_deals):
            hi = b[0]
            lo = b[0]
            buyer = 0
            for i in range(1, n_dealers):
                if b[i] > hi:
                    hi = b[i]
                    buyer = i
                if b[i] < lo:
                    lo = b[i]
            if hi - lo >= spread:
                n = 0
                for j in range(n_dealers):
                    if j != buyer and hi - b[j] >= spread:
                        n += 1

                if uses_mu and deals_done > 0:
                    if window > 0:
                        mu = <double> win_sum / <double> (deals_done if deals_done < window else window)
                    else:
                        mu = <double> full_sum / <double> deals_done
                else:
                    mu = <double> n

                if policy == 0:
                    seller_delta = greed / <double> n
                elif policy == 1:
                    if seller_mode == 0:
                        seller_delta = greed * (1.0 + eps_seller) / <double> n
                    else:
                        seller_delta = greed * eps_seller / <double> n
                else:
                    seller_delta = greed / mu

                for j in range(n_dealers):
                    if j != buyer and hi - b[j] >= spread:
                        d[j] = seller_delta
                d[buyer] = buyer_delta
                total = 0.0
                for i in range(n_dealers):
                    b[i] = b[i] + d[i] + a[i]
                    d[i] = 0.0
                    total += b[i]

                if deals_done >= cap:
                    cap = _grow(&hist, cap)
                hist[deals_done] = n
                full_sum += n
                if window > 0:
                    win_sum += n
                    if deals_done >= window:
                        win_sum -= hist[deals_done - window]
                deals_done += 1
                price = hi
                last_deal_step = step

                rec_step.append(step)
                rec_price.append(hi)
                rec_buyer.append(buyer)
                rec_n.append(n)
                rec_mu.append(mu)
                rec_sum.append(total)
            else:
                for i in range(n_dealers):
                    b[i] = b[i] + 0.0 + a[i]
            step += 1
            if record_steps:
                step_prices.append(price)

        out_bids = [b[i] for i in range(n_dealers)]
        out_hist = [hist[k] for k in range(deals_done)]
    finally:
        free(b); free(a); free(d); free(hist)

    return {
        "bids": out_bids,
        "price": price,
        "history": out_hist,
        "step": step,
        "deals_done": deals_done,
        "last_deal_step": last_deal_step,
        "rec_step": rec_step,
        "rec_price": rec_price,
        "rec_buyer": rec_buyer,
        "rec_n": rec_n,
        "rec_mu": rec_mu,
        "rec_sum": rec_sum,
        "step_prices": step_prices,
    }
