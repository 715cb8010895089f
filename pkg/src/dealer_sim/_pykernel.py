"""Pure-Python step loop, used when the compiled kernel is unavailable.

Must stay operation-for-operation identical to ``_ckernel.pyx``: the two
backends are required to produce bit-identical output.
"""

BACKEND = "python"


def run_loop(bids, expectations, price, history, step, deals_done, last_deal_step,
             spread, greed, eps_buyer, eps_seller, policy, seller_mode, window,
             max_steps, target_deals, record_steps):
    bids = [float(b) for b in bids]
    expectations = [float(a) for a in expectations]
    history = [int(h) for h in history]
    n_dealers = len(bids)

    full_sum = sum(history)
    win_sum = sum(history[-window:]) if window > 0 else 0
    uses_mu = policy == 2 or policy == 3

    if policy == 1 or policy == 3:
        buyer_delta = -(greed * (1.0 + eps_buyer))
    else:
        buyer_delta = -greed

    rec_step = []
    rec_price = []
    rec_buyer = []
    rec_n = []
    rec_mu = []
    rec_sum = []
    step_prices = [] if record_steps else None

    while step < max_steps and (target_deals < 0 or deals_done < target_deals):
        hi = max(bids)
        if hi - min(bids) >= spread:
            buyer = bids.index(hi)
            sellers = [j for j in range(n_dealers) if j != buyer and hi - bids[j] >= spread]
            n = len(sellers)

            if uses_mu and deals_done > 0:
                if window > 0:
                    mu = win_sum / (deals_done if deals_done < window else window)
                else:
                    mu = full_sum / deals_done
            else:
                mu = float(n)

            if policy == 0:
                seller_delta = greed / n
            elif policy == 1:
                if seller_mode == 0:
                    seller_delta = greed * (1.0 + eps_seller) / n
                else:
                    seller_delta = greed * eps_seller / n
            else:
                seller_delta = greed / mu

            deltas = [0.0] * n_dealers
            deltas[buyer] = buyer_delta
            for s in sellers:
                deltas[s] = seller_delta
            bids = [b + d + a for b, d, a in zip(bids, deltas, expectations)]

            history.append(n)
            full_sum += n
            if window > 0:
                win_sum += n
                if deals_done >= window:
                    win_sum -= history[deals_done - window]
            deals_done += 1
            price = hi
            last_deal_step = step

            total = 0.0
            for b in bids:
                total += b
            rec_step.append(step)
            rec_price.append(hi)
            rec_buyer.append(buyer)
            rec_n.append(n)
            rec_mu.append(mu)
            rec_sum.append(total)
        else:
            bids = [b + 0.0 + a for b, a in zip(bids, expectations)]
        step += 1
        if record_steps:
            step_prices.append(price)

    return {
        "bids": bids,
        "price": price,
        "history": history,
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
