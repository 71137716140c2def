#!/usr/bin/env python3
"""Regenerate src/schemac/data/corpus. Output is deterministic."""
import argparse
import json
from pathlib import Path

from schemac.corpus import synthetic_tools, to_dialect

SEARCH_FILES = {
    "name": "search_files",
    "description": "Search project files by content or filename pattern",
    "parameters": {"type": "object", "properties": {
        "query": {"type": "string", "description": "The search query string"},
        "path": {"type": "string", "description": "Optional directory path to search in"}}},
}

TRI = {
    "weather": [
        {"name": "get_forecast",
         "description": "Please note that this tool returns the weather forecast for a city, e.g. Berlin or Tokyo. "
                        "The units field corresponds to the measurement system.",
         "schema": {"type": "object", "properties": {
             "city": {"type": "string", "description": "City name"},
             "days": {"type": "integer", "minimum": 1, "maximum": 14, "description": "Days ahead"},
             "units": {"type": "string", "enum": ["metric", "imperial"]}},
             "required": ["city"]}},
        {"name": "get_alerts",
         "description": "Basically lists active severe weather alerts. Run after get_forecast.",
         "schema": {"type": "object", "properties": {
             "region": {"type": "string"},
             "severity": {"type": "string", "enum": ["minor", "moderate", "severe", "extreme"]}},
             "required": ["region"]}},
    ],
    "calendar": [
        {"name": "create_event",
         "description": "This tool allows you to create a calendar event. Requires calling check_availability first.",
         "schema": {"type": "object", "properties": {
             "title": {"type": "string"},
             "start": {"type": "string", "format": "date-time", "description": "ISO 8601 start time"},
             "duration_minutes": {"type": "integer", "minimum": 5, "maximum": 480},
             "attendees": {"type": "array", "items": {"type": "string"}}},
             "required": ["title", "start"]}},
        {"name": "check_availability",
         "description": "Checks free/busy slots in other words whether attendees are free -> returns a list.",
         "schema": {"type": "object", "properties": {
             "attendees": {"type": "array", "items": {"type": "string"}},
             "window_hours": {"type": "number", "minimum": 0.5, "maximum": 72}},
             "required": ["attendees"]}},
    ],
    "repo": [
        {"name": "open_pull_request",
         "description": "Opens a pull request. It is important to note that the branch must exist as well as be pushed.",
         "schema": {"type": "object", "properties": {
             "repo": {"type": "string"},
             "head": {"type": "string"},
             "base": {"type": "string", "default": "main"},
             "draft": {"type": "boolean"}},
             "required": ["repo", "head"]}},
        {"name": "merge_pull_request",
         "description": "Merges a pull request after open_pull_request. The method must be one of the following options: merge, squash, rebase.",
         "schema": {"type": "object", "properties": {
             "number": {"type": "integer", "minimum": 1},
             "method": {"type": "string", "enum": ["merge", "squash", "rebase"]}},
             "required": ["number"]}},
        {"name": "list_branches",
         "description": "Lists branches, for example feature branches and so on.",
         "schema": {"type": "object", "properties": {"repo": {"type": "string"}}, "required": ["repo"]}},
    ],
    "database": [
        {"name": "run_query",
         "description": "Runs a read-only SQL query. Kindly keep the row limit less than or equal to 1000.",
         "schema": {"type": "object", "properties": {
             "sql": {"type": "string"},
             "limit": {"type": "integer", "minimum": 1, "maximum": 1000},
             "options": {"type": "object", "properties": {
                 "timeout_s": {"type": "number", "maximum": 30},
                 "explain": {"type": "boolean"}}, "required": ["timeout_s"]}},
             "required": ["sql"]}},
        {"name": "describe_table",
         "description": "Returns column names and types; the table name is mapped to the schema-qualified name.",
         "schema": {"type": "object", "properties": {"table": {"type": "string"}}, "required": ["table"]}},
    ],
    "email": [
        {"name": "send_email",
         "description": "Sends an email. Please make sure to include a subject. Priority => high, normal or low.",
         "schema": {"type": "object", "properties": {
             "to": {"type": "array", "items": {"type": "string", "format": "email"}},
             "subject": {"type": "string"},
             "body": {"type": "string"},
             "priority": {"type": "string", "enum": ["high", "normal", "low"]}},
             "required": ["to", "subject", "body"]}},
        {"name": "search_inbox",
         "description": "Searches the inbox, i.e. received mail only. Essentially a full-text search...",
         "schema": {"type": "object", "properties": {
             "query": {"type": "string"},
             "max_results": {"type": "integer", "minimum": 1, "maximum": 200}},
             "required": ["query"]}},
    ],
}

EXTRA = {
    "nested_config": ("anthropic-tool-use", [
        {"name": "deploy_service",
         "description": "Deploys a service. Use this tool to roll out a new version; requires build_image.",
         "input_schema": {"type": "object", "properties": {
             "service": {"type": "string"},
             "config": {"type": "object", "description": "Rollout settings", "properties": {
                 "replicas": {"type": "integer", "minimum": 1, "maximum": 50},
                 "strategy": {"type": "string", "enum": ["rolling", "blue-green", "canary"]},
                 "limits": {"type": "object", "properties": {"cpu": {"type": "string"}}}},
                 "required": ["replicas"]}},
             "required": ["service", "config"]}},
        {"name": "build_image",
         "description": "Builds a container image from the repository at a given ref.",
         "input_schema": {"type": "object", "properties": {
             "ref": {"type": "string"}, "no_cache": {"type": "boolean"}}, "required": ["ref"]}},
    ]),
    "enum_bounds": ("mcp", {"jsonrpc": "2.0", "id": 1, "result": {"tools": [
        {"name": "set_thermostat",
         "description": "Sets the target temperature. The value must be greater than or equal to 10 and less than or equal to 30.",
         "inputSchema": {"type": "object", "properties": {
             "celsius": {"type": "number", "minimum": 10, "maximum": 30.5},
             "mode": {"enum": ["heat", "cool", "auto", "off"]},
             "zone": {"type": "integer", "minimum": 0}},
             "required": ["celsius"]}},
        {"name": "get_reading",
         "description": "Reads the current sensor values, approximately every 60 seconds.",
         "inputSchema": {"type": "object", "properties": {
             "sensor": {"type": "string", "enum": ["temp", "humidity", "co2"]}}}},
    ]}}),
    "deps_chain": ("openai-fc", [
        {"type": "function", "function": {"name": "charge_card",
         "description": "Charges the card. Requires calling create_invoice first.",
         "parameters": {"type": "object", "properties": {"invoice_id": {"type": "string"}}, "required": ["invoice_id"]}}},
        {"type": "function", "function": {"name": "send_receipt",
         "description": "Emails a receipt after charge_card succeeds.",
         "parameters": {"type": "object", "properties": {"invoice_id": {"type": "string"}}, "required": ["invoice_id"]}}},
        {"type": "function", "function": {"name": "create_invoice",
         "description": "Creates an invoice for a customer. This function is used to start billing.",
         "parameters": {"type": "object", "properties": {
             "customer_id": {"type": "string"},
             "amount_cents": {"type": "integer", "minimum": 1},
             "currency": {"type": "string", "enum": ["usd", "eur", "gbp"]}},
             "required": ["customer_id", "amount_cents"]}}},
    ]),
    "unicode_desc": ("mcp", {"tools": [
        {"name": "translate_text",
         "description": "Übersetzt Text – translates text between languages (e.g. de → en). Café, naïve, 日本語 are fine.",
         "inputSchema": {"type": "object", "properties": {
             "text": {"type": "string"},
             "target": {"type": "string", "enum": ["en", "de", "ja", "fr"]}},
             "required": ["text", "target"]}},
    ]}),
    "opaque_keys": ("openai-fc", [
        {"type": "function", "strict": True, "function": {"name": "lookup_order",
         "description": "Looks up an order by its id.",
         "x-rate-limit": "10/min",
         "parameters": {"type": "object", "additionalProperties": False, "properties": {
             "order_id": {"type": "string", "pattern": "^ORD-[0-9]+$"},
             "fields": {"type": "array", "items": {"type": "string"}, "maxItems": 5}},
             "required": ["order_id"]}}},
    ]),
}


def write(out: Path, name: str, dialect: str, doc) -> None:
    (out / f"{name}.json").write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    (out / f"{name}.dialect").write_text(dialect + "\n", encoding="utf-8")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/schemac/data/corpus"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "search_files.json").write_text(json.dumps(SEARCH_FILES) + "\n", encoding="utf-8")
    (out / "search_files.dialect").write_text("openai-fc\n", encoding="utf-8")
    for name, tools in TRI.items():
        for dialect, tag in (("openai-fc", "openai"), ("anthropic-tool-use", "anthropic"), ("mcp", "mcp")):
            write(out, f"tri_{name}_{tag}", dialect, to_dialect(tools, dialect))
    for name, (dialect, doc) in EXTRA.items():
        write(out, name, dialect, doc)
    write(out, "synthetic_16", "mcp", to_dialect(synthetic_tools(16, seed=16), "mcp"))
    write(out, "synthetic_43", "mcp", to_dialect(synthetic_tools(43, seed=43), "mcp"))


if __name__ == "__main__":
    main()
