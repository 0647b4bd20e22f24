"""Regenerates tickets.jsonl: 200 synthetic IT support tickets in 4 classes."""
import json
import random

rng = random.Random(20240501)

CLASSES = {
    "network": ["vpn", "wifi", "router", "dns", "latency", "firewall", "ethernet", "proxy", "bandwidth", "gateway"],
    "hardware": ["laptop", "keyboard", "monitor", "battery", "docking", "mouse", "charger", "screen", "fan", "motherboard"],
    "account": ["password", "login", "locked", "reset", "mfa", "permissions", "username", "sso", "expired", "access"],
    "printer": ["printer", "toner", "paper", "jam", "scanner", "cartridge", "spooler", "duplex", "tray", "queue"],
}
FILLER = ["please", "help", "urgent", "since", "yesterday", "office", "working", "issue", "again",
          "team", "morning", "cannot", "broken", "ticket", "user", "request", "thanks", "floor", "today", "slow"]

rows = []
for label, words in CLASSES.items():
    for _ in range(50):
        n_key = rng.randint(3, 5)
        n_fill = rng.randint(4, 8)
        tokens = rng.sample(words, n_key) + [rng.choice(FILLER) for _ in range(n_fill)]
        rng.shuffle(tokens)
        rows.append({"text": " ".join(tokens), "label": label})
rng.shuffle(rows)

with open("tickets.jsonl", "w") as f:
    for r in rows:
        f.write(json.dumps(r, sort_keys=True) + "\n")
