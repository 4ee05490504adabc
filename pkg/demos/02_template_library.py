"""The bundled template library and its transition statistics.

Templates live in a canonical key (C major / A minor) with style, mode and
length labels. Counting every two-bar window across the library gives the
transition statistics that price phrase junctions: a junction seen once
costs 1, one as common as the library is large costs 0, an unseen one
costs 2.
"""

from collections import Counter

from cadenza import TransitionStats, load_default_library, to_roman, canonical_key
from cadenza.library import transition_loss_for_count

library = load_default_library()
print(f"seed library: {library.N} templates")

by_style = Counter((t.style.value, t.mode.value) for t in library)
for (style, mode), count in sorted(by_style.items()):
    print(f"  {style:>12} / {mode}: {count}")

print("\na few identities:")
for template in list(library)[:6]:
    identity = to_roman(template.progression, canonical_key(template.mode))
    print(f"  {template.id:>18} ({template.length_bars} bars): {identity}")

stats = TransitionStats.build(library)
print(f"\ndistinct two-bar windows: {len(stats.counts)}")
most_common = sorted(stats.counts.items(), key=lambda kv: -kv[1])[:3]
for signature, count in most_common:
    print(f"  count {count}: {signature[:48]}...")

print("\nthe transition-loss curve for this library size:")
for c in (0, 1, 2, 5, 10, library.N):
    print(f"  c={c:>3} -> loss {transition_loss_for_count(c, library.N):.4f}")
