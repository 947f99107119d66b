import sys
import xml.etree.ElementTree as ET

root = ET.parse(sys.argv[1]).getroot()
ns = "{http://www.w3.org/2000/svg}"
lines = root.findall(f".//{ns}polyline")
agents = {p.get("data-agent") for p in lines}
expected = int(sys.argv[2])
if len(lines) != expected or len(agents) != expected:
    sys.exit(f"expected {expected} polylines, found {len(lines)}")
