#!/usr/bin/env node
// Bin entry: always executes, unlike the importable cli module.
import { hideBin } from "yargs/helpers";
import { main } from "./cli.js";

process.exit(main(hideBin(process.argv)));
