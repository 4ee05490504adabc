"""The interactive HTTP workflow, driven end to end in process.

The same five endpoints back the web UI: upload with labels, generate,
per-phrase restyle, texture switch, MIDI download. Run the real server with
``cadenza serve``; here a test client exercises the app object directly.
"""

import io
from pathlib import Path

from fastapi.testclient import TestClient

from cadenza.service import create_app

DATA = Path(__file__).resolve().parent.parent / "src" / "cadenza" / "data"

client = TestClient(create_app())

upload = client.post(
    "/songs",
    files={"file": ("demo.mid", io.BytesIO((DATA / "demo_melody.mid").read_bytes()))},
    data={"phrases": "A8A8B8", "key": "C", "mode": "major", "meter": "4/4"},
)
session = upload.json()["session_id"]
print(f"uploaded: session {session[:8]}..., {upload.json()['phrase_count']} phrases")

summary = client.post(f"/songs/{session}/generate",
                      json={"complexity": "sparse"}).json()
for phrase in summary["phrases"]:
    print(f"  phrase {phrase['index']} [{phrase['label']}]: {phrase['identity']} "
          f"({phrase['style']}), styles available: {phrase['available_styles']}")

target = summary["phrases"][1]
new_style = next(s for s in target["available_styles"] if s != target["style"])
restyled = client.post(
    f"/songs/{session}/phrases/1/style", json={"style": new_style}
).json()
print(f"\nrestyled phrase 1 to {new_style}: "
      f"now {restyled['phrases'][1]['template_id']}, "
      f"identity still {restyled['phrases'][1]['identity']}")

retextured = client.post(f"/songs/{session}/texture",
                         json={"complexity": "dense"}).json()
print(f"switched texture: {retextured['texture_ids']}")

midi = client.get(f"/songs/{session}/midi")
print(f"downloaded {len(midi.content)} bytes of MIDI "
      f"({midi.headers['content-type']})")
