import json
import sys

print(json.dumps(sys.argv[1:]), file=sys.stderr)
print("ACPF_RESULT status=%s perf=%s" % (sys.argv[1], sys.argv[2]))
