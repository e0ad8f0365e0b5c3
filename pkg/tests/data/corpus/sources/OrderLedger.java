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
