"""Source files and recipes for the bundled evaluation corpus.

Each entry: file name -> java text, plus per-method recipes describing the
developer-performed extraction (the oracle) and how the synthetic model
responses should relate to it:

  direct  - responses contain the oracle range itself
  extend  - responses contain the range minus its leading declaration(s);
            the declaration-absorption pass must recover the oracle
  shrink  - responses contain the whole ``if`` statement; the header-shrink
            pass must recover the oracle (the if body)
  ranked  - like direct, but buried in a large applicable pool; ranking must
            surface it
  miss    - responses never land near the oracle

Oracle and emitted ranges are line offsets relative to the method signature
line, resolved to absolute lines after assembly.
"""

FILES = {
    "InventoryReport.java": """\
package app.reports;

import java.util.List;

class InventoryReport {

    private final Catalog catalog;
    private final Audit audit;

    /** Renders the weekly summary block for the whole catalog. */
    String buildSummary(List<Item> items, int week) {
        StringBuilder out = new StringBuilder();
        out.append(header(week));
        int total = 0;
        for (Item item : items) {
            total = total + item.quantity();
        }
        out.append(renderTotal(total));
        String footer = footerFor(week);
        out.append(footer);
        out.append(catalog.version());
        trimTrailing(out);
        return out.toString();
    }

    void restockLowItems(List<Item> items) {
        Ledger ledger = openLedger();
        int restocked = 0;
        for (Item item : items) {
            if (item.quantity() < item.threshold()) {
                ledger.add(item);
                restocked = restocked + 1;
            }
        }
        ledger.seal();
        audit.note(restocked);
        closeLedger(ledger);
    }

    String formatCsvRow(Item item) {
        StringBuilder row = new StringBuilder();
        row.append(item.sku());
        row.append(SEP);
        row.append(item.quantity());
        row.append(SEP);
        row.append(item.location());
        return row.toString();
    }
}
""",
    "SessionCache.java": """\
package app.cache;

import java.util.ArrayList;
import java.util.List;

class SessionCache {

    private final EntryMap entries;
    private final Counters counters;

    int evictExpired(long now) {
        List<String> doomed = new ArrayList<>();
        for (Entry entry : entries.values()) {
            if (entry.expiresAt() < now) {
                doomed.add(entry.key());
            }
        }
        int removed = 0;
        for (String key : doomed) {
            entries.remove(key);
            removed = removed + 1;
        }
        metrics.recordEviction(removed);
        logDebug(removed);
        return removed;
    }

    /** Snapshot of hit ratio, weight, and hot-entry count. */
    Stats computeStats() {
        long hits = counters.hits();
        long misses = counters.misses();
        long total = hits + misses;
        double ratio = safeRatio(hits, total);
        int entryCount = entries.size();
        long bytes = 0;
        for (Entry entry : entries.values()) {
            bytes = bytes + entry.weight();
        }
        int hot = 0;
        for (Entry entry : entries.values()) {
            if (entry.touches() > HOT_TOUCHES) {
                hot = hot + 1;
            }
        }
        Stats stats = new Stats(ratio, entryCount, bytes, hot);
        publishGauge(stats);
        return stats;
    }

    void touchEntry(String key, long now) {
        Entry entry = entries.get(key);
        counters.markLookup();
        if (entry != null) {
            entry.recordTouch(now);
            entries.promote(key);
            counters.markHit();
        }
        traceLookup(key);
    }
}
""",
    "RoutePlanner.java": """\
package app.nav;

import java.util.ArrayList;
import java.util.List;

class RoutePlanner {

    private final Metrics metrics;

    Route planRoute(Point origin, Point goal) {
        Grid grid = loadGrid();
        List<Point> frontier = new ArrayList<>();
        frontier.add(origin);
        int expanded = 0;
        while (!frontier.isEmpty() && expanded < LIMIT) {
            Point current = popBest(frontier);
            expanded = expanded + 1;
            pushNeighbors(grid, frontier, current);
        }
        metrics.recordExpansions(expanded);
        Route route = traceBack(goal);
        route.simplify();
        return route;
    }

    double scoreSegments(List<Segment> segments) {
        double length = 0.0;
        for (Segment segment : segments) {
            length = length + segment.span();
        }
        double penalty = 0.0;
        for (Segment segment : segments) {
            penalty = penalty + turnCost(segment);
        }
        double raw = length * WEIGHT + penalty;
        double capped = Math.min(raw, CEILING);
        logScore(raw, capped);
        return capped;
    }

    void emitWaypoints(Route route, Sink sink) {
        sink.open();
        for (Point point : route.points()) {
            sink.accept(point.x(), point.y());
        }
        sink.flush();
        sink.close();
    }
}
""",
    "LogRotator.java": """\
package app.ops;

import java.nio.file.Path;
import java.util.ArrayList;
import java.util.List;

class LogRotator {

    void rotateFiles(Path dir, int keep) {
        List<Path> logs = listLogs(dir);
        sortByAge(logs);
        int index = 0;
        List<Path> victims = new ArrayList<>();
        for (Path log : logs) {
            if (index >= keep) {
                victims.add(log);
            }
            index = index + 1;
        }
        for (Path victim : victims) {
            deleteQuietly(victim);
        }
        auditRotation(dir, victims.size());
    }

    void compressOld(List<Path> logs, long cutoff) {
        Compressor compressor = newCompressor();
        long saved = 0;
        for (Path log : logs) {
            if (ageOf(log) > cutoff) {
                saved = saved + compressor.pack(log);
            }
        }
        compressor.finish();
        metrics.bytesSaved(saved);
    }

    void purgeEmptyDirs(Path root) {
        List<Path> dirs = walkDirs(root);
        reverseOrder(dirs);
        if (dirs.size() > 0) {
            Path first = dirs.get(0);
            markSweepStart(first);
            removeEmpties(dirs);
            logSweep(dirs.size());
        }
        closeWalker();
    }
}
""",
    "MatrixOps.java": """\
package app.numeric;

class MatrixOps {

    Matrix multiplyDense(Matrix a, Matrix b) {
        int rows = a.rowCount();
        int cols = b.colCount();
        int inner = a.colCount();
        checkDims(inner, b.rowCount());
        double[] cell = new double[rows * cols];
        for (int r = 0; r < rows; r++) {
            for (int c = 0; c < cols; c++) {
                double sum = 0.0;
                for (int k = 0; k < inner; k++) {
                    sum = sum + a.at(r, k) * b.at(k, c);
                }
                cell[r * cols + c] = sum;
            }
        }
        Matrix result = wrap(rows, cols, cell);
        result.seal();
        return result;
    }

    void normalizeRows(double[][] grid) {
        int touched = 0;
        for (double[] row : grid) {
            double norm = rowNorm(row);
            if (norm > EPSILON) {
                scaleRow(row, norm);
                touched = touched + 1;
            }
        }
        audit.rowsTouched(touched);
    }

    void transposeInto(Matrix src, Matrix dst) {
        int rows = src.rowCount();
        int cols = src.colCount();
        checkCapacity(dst, cols, rows);
        for (int r = 0; r < rows; r++) {
            for (int c = 0; c < cols; c++) {
                dst.put(c, r, src.at(r, c));
            }
        }
        dst.markDirty();
        dst.stampFrom(src);
    }
}
""",
    "TokenScanner.java": """\
package app.lex;

import java.util.ArrayList;
import java.util.List;

class TokenScanner {

    List<String> scanIdentifiers(String text) {
        List<String> found = new ArrayList<>();
        int pos = 0;
        while (pos < text.length()) {
            int start = pos;
            pos = advanceWord(text, pos);
            if (pos > start) {
                found.add(text.substring(start, pos));
            }
            pos = skipGap(text, pos);
        }
        dedupe(found);
        sortStable(found);
        return found;
    }

    int collectEscapes(String raw, List<Integer> out) {
        int count = 0;
        for (int i = 0; i < raw.length(); i++) {
            char ch = raw.charAt(i);
            if (ch == ESCAPE) {
                out.add(i);
                count = count + 1;
            }
        }
        reportEscapes(count);
        return count;
    }

    int skipWhitespace(String text, int from) {
        int pos = from;
        while (pos < text.length() && isGap(text.charAt(pos))) {
            pos = pos + 1;
        }
        traceSkip(from, pos);
        return pos;
    }
}
""",
    "OrderLedger.java": """\
package app.billing;

import java.util.List;

class OrderLedger {

    private final Ledger ledger;

    void settleBatch(List<Debit> batch) {
        validateBatch(batch);
        Cursor cursor = ledger.openCursor();
        ledger.markBatchStart();
        if (batch.size() > MIN_BATCH) {
            beginBulkMode(cursor);
            for (Debit debit : batch) {
                cursor.settle(debit);
            }
            endBulkMode(cursor);
        }
        cursor.close();
        reconcile(batch);
    }

    Summary summarizeDebits(List<Debit> batch) {
        long cents = 0;
        int flagged = 0;
        for (Debit debit : batch) {
            cents = cents + debit.amountCents();
        }
        for (Debit debit : batch) {
            if (debit.isFlagged()) {
                flagged = flagged + 1;
            }
        }
        Summary summary = new Summary(cents, flagged);
        summary.freeze();
        return summary;
    }
}
""",
}

# (file, method name, mode, oracle offsets, emitted offsets, oracle method name)
# Offsets are relative to the signature line (offset 0).
RECIPES = [
    ("InventoryReport.java", "buildSummary", "direct", (3, 6), (3, 6), "sumQuantities"),
    ("InventoryReport.java", "restockLowItems", "extend", (2, 8), (3, 8), "restockBelowThreshold"),
    ("InventoryReport.java", "formatCsvRow", "miss", (1, 4), None, "appendSkuFields"),
    ("SessionCache.java", "evictExpired", "direct", (1, 6), (1, 6), "collectExpiredKeys"),
    ("SessionCache.java", "computeStats", "ranked", (6, 9), (6, 9), "sumEntryWeights"),
    ("SessionCache.java", "touchEntry", "shrink", (4, 6), (3, 7), "recordHit"),
    ("RoutePlanner.java", "planRoute", "extend", (4, 9), (5, 9), "expandFrontier"),
    ("RoutePlanner.java", "scoreSegments", "direct", (5, 8), (5, 8), "sumTurnCosts"),
    ("RoutePlanner.java", "emitWaypoints", "miss", (2, 4), None, "writePoints"),
    ("LogRotator.java", "rotateFiles", "direct", (3, 10), (3, 10), "selectVictims"),
    ("LogRotator.java", "compressOld", "extend", (2, 7), (3, 7), "packOldLogs"),
    ("LogRotator.java", "purgeEmptyDirs", "shrink", (4, 7), (3, 8), "sweepEmpties"),
    ("MatrixOps.java", "multiplyDense", "ranked", (5, 14), (5, 14), "fillProductCells"),
    ("MatrixOps.java", "normalizeRows", "extend", (1, 8), (2, 8), "scaleLargeRows"),
    ("MatrixOps.java", "transposeInto", "direct", (4, 8), (4, 8), "copyTransposed"),
    ("TokenScanner.java", "scanIdentifiers", "direct", (1, 10), (1, 10), "collectWords"),
    ("TokenScanner.java", "collectEscapes", "extend", (1, 8), (2, 8), "findEscapePositions"),
    ("TokenScanner.java", "skipWhitespace", "miss", (1, 4), None, "advancePastGaps"),
    ("OrderLedger.java", "settleBatch", "shrink", (5, 9), (4, 10), "settleInBulk"),
    ("OrderLedger.java", "summarizeDebits", "direct", (6, 10), (6, 10), "countFlagged"),
]
