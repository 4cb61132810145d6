"""
Round Trip Demo
Profile -> spectral data -> Schroedinger form -> b-identity -> curvature, against a running API
"""
import math
import os

import httpx
from dotenv import load_dotenv

load_dotenv()
BASE_URL = os.getenv("SURFSPEC_URL", "http://localhost:8000")
N = 400


def print_section(title):
    """Print formatted section header"""
    print("\n" + "=" * 70)
    print(f"  {title}")
    print("=" * 70)


def sine_profile(amplitude: float, k: int) -> dict:
    values = [amplitude * math.sin(k * math.pi * i / N) for i in range(N + 1)]
    values[0] = values[-1] = 0.0
    return {"n": N, "values": values}


def demo_roundtrip():
    client = httpx.Client(base_url=BASE_URL, timeout=120.0)

    health = client.get("/health").json()
    print(f"Server: {health['app_name']} {health['version']} ({health['status']})")

    q = sine_profile(0.1, 2)
    profile = {"m": 1, "r0": 1.0, "q0": 0.0, "q": q}
    bc = {"kind": "mixed", "b": 0.5}

    print_section("Forward spectrum, Mixed(b = 0.5)")
    response = client.post("/api/spectra/forward", json={"profile": profile, "bc": bc, "n_modes": 40})
    response.raise_for_status()
    data = response.json()
    print(f"c0 = {data['c0']:.10f}")
    for n, (mu, tilde) in enumerate(zip(data["mu"][:6], data["tilde_mu"][:6])):
        print(f"  mu_{n} = {mu:14.8f}   tilde_mu_{n} = {tilde:+.3e}")

    print_section("Schroedinger form")
    form = client.post("/api/spectra/transform", json={"profile": profile, "bc": bc}).json()
    print(f"c0 = {form['c0']:.10f}, bc' = {form['bc']}")
    print(f"max |p| = {max(abs(v) for v in form['p']['values']):.6f}")

    print_section("b from eigenvalues and norming constants")
    for n_terms in (5, 10, 20, 40):
        estimate = client.post("/api/spectra/verify-b", json={"data": data, "n_terms": n_terms}).json()
        print(f"  N = {n_terms:3d}: b ~ {estimate['estimate']:.6f}  (last term {estimate['last_term']:.2e})")

    print_section("Curvature map and inverse")
    mapped = client.post("/api/geometry/curvature-map", json={"q": q}).json()
    print(f"K0 = {mapped['K0']:.10f}")
    back = client.post("/api/geometry/curvature-invert", json={"xi": mapped["xi"]}).json()
    error = max(abs(a - b) for a, b in zip(back["q"]["values"], q["values"]))
    print(f"max |q - G^-1(G(q))| = {error:.3e}")

    client.close()


if __name__ == "__main__":
    demo_roundtrip()
